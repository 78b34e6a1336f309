// Copyright 2026 The specmer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace specmer {

// In-place iterative radix-2 FFT (forward, unnormalized). Size must be a
// power of two.
void fft_inplace(std::span<std::complex<double>> data);

// One-sided power spectrum |X_k|^2, k = 0..n/2, of a real frame whose length
// is a power of two.
std::vector<double> real_power_spectrum(std::span<const double> frame);

inline bool is_power_of_two(long long n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace specmer
