// SPDX-License-Identifier: Apache-2.0
//
// qmimo - stochastic hybrid combining for quantized massive MIMO uplinks
// Copyright (C) 2026 The qmimo authors
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

#ifndef QMIMO_TYPES_HPP
#define QMIMO_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace qmimo {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Random engine used everywhere. Streams are derived from a base seed with
// derive_seed() so that every consumer owns an independent, reproducible stream.
using Rng = std::mt19937_64;

// splitmix64 finaliser applied to (seed, stream). Stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed(seed, stream)); }

// Named stream ids. Training and evaluation samples never share a stream.
namespace stream {
constexpr std::uint64_t geometry = 1;
constexpr std::uint64_t scattering = 2;
constexpr std::uint64_t training = 3;
constexpr std::uint64_t evaluation = 4;
constexpr std::uint64_t burn_in = 5;
constexpr std::uint64_t selection = 6;
constexpr std::uint64_t delayed = 7;
} // namespace stream

// System dimensions: M antennas, S RF chains, N codewords, K users.
struct Dimensions
{
    int antennas = 64;
    int rf_chains = 12;
    int codewords = 16;
    int users = 12;

    // Throws std::invalid_argument unless 1 <= K <= S <= N <= M.
    void validate() const;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Standard circularly-symmetric complex Gaussian sample, E|z|^2 = 1.
inline cplx complex_normal(Rng &rng)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

} // namespace qmimo

#endif
