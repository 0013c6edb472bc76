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

#include "qmimo/baselines.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qmimo {

SchemeSpec SchemeSpec::of(Scheme s)
{
    SchemeSpec spec;
    spec.scheme = s;
    switch (s)
    {
    case Scheme::shc:
        break;
    case Scheme::mm:
    case Scheme::random:
        spec.frozen.selection = true;
        break;
    case Scheme::zf:
    case Scheme::mrc:
        spec.frozen.combiner = true;
        spec.frozen.beamformers = true;
        break;
    }
    return spec;
}

SelectionMatrix mm_select(const CMatrix &codebook, std::span<const ChannelSample> samples, int rf_chains)
{
    const int N = static_cast<int>(codebook.cols());
    if (N < rf_chains)
        throw std::invalid_argument("mm_select: fewer codewords than RF chains");
    if (rf_chains < 1)
        throw std::invalid_argument("mm_select: need at least one RF chain");
    if (samples.empty())
        throw std::invalid_argument("mm_select: no channel samples");

    RVector score = RVector::Zero(N);
    for (const auto &h : samples)
    {
        if (h.matrix.rows() != codebook.rows())
            throw std::invalid_argument("mm_select: channel and codebook antenna counts differ");
        score += (codebook.adjoint() * h.matrix).rowwise().squaredNorm();
    }
    score /= static_cast<double>(samples.size());

    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score(a) > score(b); });

    SelectionMatrix out;
    out.relaxed = false;
    out.matrix = RMatrix::Zero(N, rf_chains);
    for (int s = 0; s < rf_chains; ++s)
        out.matrix(order[s], s) = 1.0;
    return out;
}

SelectionMatrix user_centric_select(const CMatrix &codebook, std::span<const ChannelSample> samples, int rf_chains)
{
    const int N = static_cast<int>(codebook.cols());
    if (N < rf_chains)
        throw std::invalid_argument("user_centric_select: fewer codewords than RF chains");
    if (samples.empty())
        throw std::invalid_argument("user_centric_select: no channel samples");
    const int K = samples.front().users();
    if (K > rf_chains)
        throw std::invalid_argument("user_centric_select: more users than RF chains");

    RMatrix energy = RMatrix::Zero(N, K);
    for (const auto &h : samples)
        energy += (codebook.adjoint() * h.matrix).cwiseAbs2();
    const RVector user_energy = energy.colwise().sum().transpose();

    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return user_energy(a) < user_energy(b); });

    std::vector<char> taken(N, 0);
    SelectionMatrix out;
    out.relaxed = false;
    out.matrix = RMatrix::Zero(N, rf_chains);
    int chain = 0;
    auto claim = [&](const auto &score) {
        int best = -1;
        for (int n = 0; n < N; ++n)
            if (!taken[n] && (best < 0 || score(n) > score(best)))
                best = n;
        taken[best] = 1;
        out.matrix(best, chain++) = 1.0;
    };
    for (int k : order)
    {
        const double e = user_energy(k) > 0.0 ? user_energy(k) : 1.0;
        claim([&](int n) { return energy(n, k) / e; });
    }
    RMatrix normalised = energy;
    for (int k = 0; k < K; ++k)
        if (user_energy(k) > 0.0)
            normalised.col(k) /= user_energy(k);
    const RVector total = normalised.rowwise().sum();
    while (chain < rf_chains)
        claim([&](int n) { return total(n); });
    return out;
}

SelectionMatrix random_select(Rng &rng, int codewords, int rf_chains)
{
    if (codewords < rf_chains)
        throw std::invalid_argument("random_select: fewer codewords than RF chains");
    if (rf_chains < 1)
        throw std::invalid_argument("random_select: need at least one RF chain");
    std::vector<int> rows(codewords);
    std::iota(rows.begin(), rows.end(), 0);
    // Partial Fisher-Yates with an explicit uniform draw keeps the result
    // identical across standard library implementations.
    for (int s = 0; s < rf_chains; ++s)
    {
        const std::uint64_t span = static_cast<std::uint64_t>(codewords - s);
        const std::uint64_t limit = rng.max() - rng.max() % span;
        std::uint64_t r = 0;
        do
            r = rng();
        while (r >= limit);
        std::swap(rows[s], rows[s + static_cast<int>(r % span)]);
    }
    SelectionMatrix out;
    out.relaxed = false;
    out.matrix = RMatrix::Zero(codewords, rf_chains);
    for (int s = 0; s < rf_chains; ++s)
        out.matrix(rows[s], s) = 1.0;
    return out;
}

std::pair<CMatrix, CMatrix> zf_combiner(const CMatrix &heff)
{
    const int S = static_cast<int>(heff.rows());
    const int K = static_cast<int>(heff.cols());
    if (K < 1 || K > S)
        throw std::invalid_argument("zf_combiner: need 1 <= K <= S");

    Eigen::ColPivHouseholderQR<CMatrix> qr(heff);
    qr.setThreshold(1e-10);
    if (qr.rank() < K)
    {
        // Columns beyond the numerical rank in pivot order are the dependent ones.
        std::string cols;
        const auto perm = qr.colsPermutation().indices();
        for (int j = static_cast<int>(qr.rank()); j < K; ++j)
            cols += (cols.empty() ? "" : ", ") + std::to_string(perm(j));
        throw std::invalid_argument("zf_combiner: effective channel is rank deficient (dependent columns: " + cols +
                                    ")");
    }
    const CMatrix gram = heff.adjoint() * heff;
    const CMatrix w = heff * gram.ldlt().solve(CMatrix::Identity(K, K));
    return {CMatrix::Identity(S, S), w};
}

std::pair<CMatrix, CMatrix> mrc_combiner(const CMatrix &heff)
{
    const int S = static_cast<int>(heff.rows());
    const int K = static_cast<int>(heff.cols());
    if (K < 1 || K > S)
        throw std::invalid_argument("mrc_combiner: need 1 <= K <= S");
    CMatrix w(S, K);
    for (int k = 0; k < K; ++k)
    {
        const double n = heff.col(k).norm();
        if (!(n > 0.0))
            throw std::invalid_argument("mrc_combiner: effective channel column " + std::to_string(k) + " is zero");
        w.col(k) = heff.col(k) / n;
    }
    return {CMatrix::Identity(S, S), w};
}

CMatrix statistical_effective_channel(const SystemModel &model, const RMatrix &selection,
                                      std::span<const BeamspaceSample> samples)
{
    if (samples.empty())
        throw std::invalid_argument("statistical_effective_channel: no samples");
    const int S = static_cast<int>(selection.cols());
    const int K = static_cast<int>(samples.front().beams.cols());
    const double g = model.gain();
    const CMatrix ct = selection.transpose().cast<cplx>();

    std::vector<CMatrix> cov(K, CMatrix::Zero(S, S));
    for (const auto &b : samples)
    {
        const CMatrix e = g * (ct * b.beams);
        for (int k = 0; k < K; ++k)
            cov[k] += e.col(k) * e.col(k).adjoint();
    }
    CMatrix heff(S, K);
    for (int k = 0; k < K; ++k)
    {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(cov[k] / static_cast<double>(samples.size()));
        CVector u = es.eigenvectors().col(S - 1);
        // Fix the phase so the largest-magnitude entry is real and positive.
        Eigen::Index imax = 0;
        u.cwiseAbs().maxCoeff(&imax);
        if (std::abs(u(imax)) > 0.0)
            u *= std::conj(u(imax)) / std::abs(u(imax));
        heff.col(k) = std::sqrt(std::max(es.eigenvalues()(S - 1), 0.0)) * u;
    }
    return heff;
}

CMatrix statistical_effective_channel(const SystemModel &model, const RMatrix &selection,
                                      std::span<const ChannelSample> samples)
{
    return statistical_effective_channel(model, selection, std::span<const BeamspaceSample>(to_beamspace(model, samples)));
}

StatisticalDesign statistical_max_sinr(const SystemModel &model, const RMatrix &selection,
                                       std::span<const BeamspaceSample> samples, const RVector &p_max,
                                       double target_sinr, int iterations)
{
    if (samples.empty())
        throw std::invalid_argument("statistical_max_sinr: no samples");
    const int S = static_cast<int>(selection.cols());
    const int K = static_cast<int>(samples.front().beams.cols());
    if (p_max.size() != K || !(target_sinr >= 0.0))
        throw std::invalid_argument("statistical_max_sinr: need K power limits and a nonnegative target");
    const double g = model.gain();
    const CMatrix ct = selection.transpose().cast<cplx>();

    // Per-user covariance of C^T D^H h_k and the noise covariance sigma^2 C^T D^H D C.
    std::vector<CMatrix> cov(K, CMatrix::Zero(S, S));
    for (const auto &b : samples)
    {
        const CMatrix e = ct * b.beams;
        for (int k = 0; k < K; ++k)
            cov[k] += e.col(k) * e.col(k).adjoint();
    }
    for (auto &c : cov)
        c /= static_cast<double>(samples.size());
    const CMatrix noise = model.noise_power_mw * (ct * model.gram * selection.cast<cplx>());

    StatisticalDesign out;
    out.powers = p_max;
    out.combiner = CMatrix::Identity(S, S);
    out.beamformers = CMatrix::Zero(S, K);
    out.sinr = RVector::Zero(K);
    RVector gain_per_mw(K);
    for (int it = 0; it < iterations; ++it)
    {
        CMatrix total = noise;
        for (int j = 0; j < K; ++j)
            total += out.powers(j) * cov[j];
        const CMatrix quant = g * (1.0 - g) * CMatrix(total.diagonal().real().cast<cplx>().asDiagonal());
        for (int k = 0; k < K; ++k)
        {
            // Everything except the user's own signal.
            CMatrix q = g * g * (total - out.powers(k) * cov[k]) + quant;
            q = 0.5 * (q + q.adjoint().eval());
            const CMatrix a = 0.5 * g * g * (cov[k] + cov[k].adjoint());
            Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> es(a, q);
            CVector w = es.eigenvectors().col(S - 1);
            const double sig = w.dot(a * w).real();
            if (!(sig > 0.0))
                throw std::runtime_error("statistical_max_sinr: user " + std::to_string(k) +
                                         " has no energy on the selected codewords");
            w /= std::sqrt(sig);
            out.beamformers.col(k) = w;
            gain_per_mw(k) = 1.0 / w.dot(q * w).real();
        }
        for (int k = 0; k < K; ++k)
            out.powers(k) = std::min(p_max(k), target_sinr / gain_per_mw(k));
    }
    // Report the SINR of the final powers with the final beamformers.
    CMatrix total = noise;
    for (int j = 0; j < K; ++j)
        total += out.powers(j) * cov[j];
    const CMatrix quant = g * (1.0 - g) * CMatrix(total.diagonal().real().cast<cplx>().asDiagonal());
    for (int k = 0; k < K; ++k)
    {
        const CVector &w = out.beamformers.col(k);
        const CMatrix q = g * g * (total - out.powers(k) * cov[k]) + quant;
        out.sinr(k) = out.powers(k) / w.dot(q * w).real();
    }
    return out;
}

} // namespace qmimo
