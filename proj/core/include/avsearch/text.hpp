// Copyright 2026 The avsearch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace avsearch {

/// Lowercases ASCII letters and splits on every byte that is not an ASCII
/// letter or digit. Bytes >= 0x80 are kept inside tokens so UTF-8 words are
/// not shredded. Empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// True when `a` and `b` tokenize to the same sequence.
bool token_equal(std::string_view a, std::string_view b);

}  // namespace avsearch

namespace avsearch {

std::string base64_encode(std::string_view bytes);
/// Throws Error(kFormat) on characters outside the standard alphabet.
std::string base64_decode(std::string_view text);

}  // namespace avsearch
