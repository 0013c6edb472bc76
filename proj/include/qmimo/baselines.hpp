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

#ifndef QMIMO_BASELINES_HPP
#define QMIMO_BASELINES_HPP

#include "qmimo/config.hpp"
#include "qmimo/rssca.hpp"

#include <span>
#include <utility>

namespace qmimo {

struct SchemeSpec
{
    Scheme scheme = Scheme::shc;
    FrozenBlocks frozen;

    static SchemeSpec of(Scheme s);
};

// Scores codeword n by the sample mean of ||d_n^H H||^2 and assigns the S best
// to RF chains in decreasing score order.
SelectionMatrix mm_select(const CMatrix &codebook, std::span<const ChannelSample> samples, int rf_chains);

// Each user, weakest first, claims its strongest unclaimed codeword (by its own
// mean beam energy); remaining RF chains take the strongest unclaimed codewords
// overall. Requires K <= S <= N.
SelectionMatrix user_centric_select(const CMatrix &codebook, std::span<const ChannelSample> samples, int rf_chains);

// S distinct codewords drawn uniformly without replacement, one per RF chain.
SelectionMatrix random_select(Rng &rng, int codewords, int rf_chains);

// V = I and W the left pseudo-inverse of the S x K effective channel arranged
// in columns, so that W^H Heff = I_K. Throws std::invalid_argument naming the
// columns that make Heff rank deficient.
std::pair<CMatrix, CMatrix> zf_combiner(const CMatrix &effective_channel);

// V = I and w_k = heff_k / ||heff_k||. Throws on a zero column.
std::pair<CMatrix, CMatrix> mrc_combiner(const CMatrix &effective_channel);

// Long-term effective channel seen by the digital stage, S x K. Column k is
// sqrt(e_k) u_k for the dominant eigenpair (e_k, u_k) of the sample covariance
// of gamma * C^T D^H h_k. The plain sample mean is not used because it vanishes
// for zero-mean fading.
CMatrix statistical_effective_channel(const SystemModel &model, const RMatrix &selection,
                                      std::span<const ChannelSample> samples);

// Same quantity on beamspace samples.
CMatrix statistical_effective_channel(const SystemModel &model, const RMatrix &selection,
                                      std::span<const BeamspaceSample> samples);

// Powers and receive beamformers maximising the ratio of long-term signal to
// long-term interference, noise and quantization power on a fixed selection.
// Alternates the dominant generalized eigenvector per user with the fixed point
// p_k <- min(P_k^max, target / a_k(p)), where SINR_k = p_k a_k(p). Beamformers are
// scaled to unit long-term signal gain and V = I.
struct StatisticalDesign
{
    RVector powers;
    CMatrix combiner;
    CMatrix beamformers;
    RVector sinr; // long-term SINR at the returned point
};
StatisticalDesign statistical_max_sinr(const SystemModel &model, const RMatrix &selection,
                                       std::span<const BeamspaceSample> samples, const RVector &p_max,
                                       double target_sinr, int iterations = 50);

} // namespace qmimo

#endif
