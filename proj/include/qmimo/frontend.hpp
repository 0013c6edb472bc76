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

#ifndef QMIMO_FRONTEND_HPP
#define QMIMO_FRONTEND_HPP

#include "qmimo/channel.hpp"
#include "qmimo/types.hpp"

#include <span>
#include <vector>

namespace qmimo {

// M x N matrix of unit-norm beams.
struct Codebook
{
    CMatrix matrix;

    int antennas() const { return static_cast<int>(matrix.rows()); }
    int size() const { return static_cast<int>(matrix.cols()); }
};

// Column n steers towards sine-angle -1 + (2n+1)/N.
Codebook dft_codebook(int antennas, int codewords);

// N x S codeword-to-RF-chain assignment, either relaxed to [0,1] or binary.
struct SelectionMatrix
{
    RMatrix matrix;
    bool relaxed = true;

    // Throws std::invalid_argument when the entries violate the declared kind.
    // A binary matrix must have unit column sums and row sums of at most one.
    void validate() const;
};

// True when every entry is 0/1, every column sums to one and every row to at most one.
bool is_valid_binary_selection(const RMatrix &c);

// AQNM parameters of a q-bit scalar quantizer: distortion rho, gain 1 - rho.
struct QuantizerModel
{
    int bits = 0;
    double distortion = 0.0;
    double gain = 1.0;
};

QuantizerModel quantizer_params(int bits);

// Lloyd-Max distortion for unit-variance Gaussian input, q = 1..5.
inline constexpr double lloyd_max_distortion[5] = {0.3634, 0.1175, 0.03455, 0.009501, 0.002505};

// Offsets of the stacked variable x = [p; c; v; w] (column-major vec of C, V, W).
struct Layout
{
    int users = 0;
    int codewords = 0;
    int rf_chains = 0;

    Layout() = default;
    Layout(int K, int N, int S) : users(K), codewords(N), rf_chains(S) {}
    explicit Layout(const Dimensions &d) : Layout(d.users, d.codewords, d.rf_chains) {}

    int p_offset() const { return 0; }
    int c_offset() const { return users; }
    int v_offset() const { return users + codewords * rf_chains; }
    int w_offset() const { return v_offset() + rf_chains * rf_chains; }
    int size() const { return w_offset() + rf_chains * users; }
    // Number of leading real-valued coordinates (p and c blocks).
    int real_size() const { return v_offset(); }

    bool operator==(const Layout &) const = default;
};

// Powers in mW, relaxed or binary selection, digital combiner V (S x S) and
// per-user receive beamformers W (S x K).
struct DesignPoint
{
    RVector powers;
    RMatrix selection;
    CMatrix combiner;
    CMatrix beamformers;

    Layout layout() const;
    CVector stack() const;
    static DesignPoint unstack(const CVector &x, const Layout &layout);
};

// Everything about the receiver that does not change between frames.
struct SystemModel
{
    Dimensions dims;
    Codebook codebook;
    CMatrix gram; // D^H D
    QuantizerModel quantizer;
    double noise_power_mw = 0.0;

    SystemModel() = default;
    SystemModel(const Dimensions &d, int bits, double noise_power_mw);

    double gain() const { return quantizer.gain; }
};

// Channel projected on the codebook: B = D^H H (N x K). All receiver quantities
// only need B, so samples are converted once and reused across iterations.
struct BeamspaceSample
{
    CMatrix beams;
    std::uint64_t frame_index = 0;
};

BeamspaceSample to_beamspace(const SystemModel &model, const ChannelSample &h);
std::vector<BeamspaceSample> to_beamspace(const SystemModel &model, std::span<const ChannelSample> samples);

// R_q = g(1-g) Diag(U^H H P H^H U + sigma2 U^H U). Returned as a full S x S
// matrix with zero off-diagonal entries.
CMatrix quantization_noise_cov(const CMatrix &rf_combiner, const CMatrix &channel, const RVector &powers,
                               double noise_power, double gain);

// Per-user decomposition of the SINR at one channel sample.
struct RateTerms
{
    RVector signal;
    RVector interference;
    RVector noise;
    RVector quantization;

    RVector sinr() const;
    RVector rates() const;
};

RateTerms rate_terms(const DesignPoint &x, const BeamspaceSample &b, const SystemModel &model);

double sinr(const DesignPoint &x, const ChannelSample &h, const SystemModel &model, int user);
double instantaneous_rate(const DesignPoint &x, const ChannelSample &h, const SystemModel &model, int user);

// log2(1 + SINR_k) for all users at once.
RVector instantaneous_rates(const DesignPoint &x, const BeamspaceSample &b, const SystemModel &model);

// Sample mean of the instantaneous rate. Throws on an empty sample set.
double average_rate(const DesignPoint &x, std::span<const ChannelSample> samples, const SystemModel &model,
                    int user);
RVector average_rates(const DesignPoint &x, std::span<const BeamspaceSample> samples, const SystemModel &model);

} // namespace qmimo

#endif
