// SPDX-License-Identifier: Apache-2.0
//
// qostbc: turbo-coded quasi-orthogonal STBC link-level simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace qostbc
{

using cplx = std::complex<double>;

// One bit per element, values 0 or 1.
using Bits = std::vector<std::uint8_t>;

// Log-likelihood ratios, log(P(b=0)/P(b=1)): positive means bit 0 is more likely.
// Every producer in the library keeps the values finite.
using LlrFrame = std::vector<double>;

// Transmit antennas of the quasi-orthogonal code.
inline constexpr std::size_t kTxAntennas = 4;

// Time slots per code block.
inline constexpr std::size_t kBlockSlots = 4;

// Magnitude cap applied to every LLR the library emits.
inline constexpr double kMaxLlr = 1.0e3;

} // namespace qostbc
