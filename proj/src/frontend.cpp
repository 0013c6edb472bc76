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

#include "qmimo/frontend.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qmimo {

void Dimensions::validate() const
{
    if (users < 1 || rf_chains < users || codewords < rf_chains || antennas < codewords)
        throw std::invalid_argument("Dimensions: require 1 <= K <= S <= N <= M");
}

Codebook dft_codebook(int antennas, int codewords)
{
    if (codewords < 1 || antennas < 1)
        throw std::invalid_argument("dft_codebook: sizes must be positive");
    if (codewords > antennas)
        throw std::invalid_argument("dft_codebook: codebook larger than the array (N > M)");
    Codebook d;
    d.matrix.resize(antennas, codewords);
    for (int n = 0; n < codewords; ++n)
        d.matrix.col(n) = ula_steering(antennas, -1.0 + (2.0 * n + 1.0) / codewords);
    return d;
}

bool is_valid_binary_selection(const RMatrix &c)
{
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (c.data()[i] != 0.0 && c.data()[i] != 1.0)
            return false;
    for (Eigen::Index j = 0; j < c.cols(); ++j)
        if (c.col(j).sum() != 1.0)
            return false;
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        if (c.row(i).sum() > 1.0)
            return false;
    return true;
}

void SelectionMatrix::validate() const
{
    if (relaxed)
    {
        if ((matrix.array() < 0.0).any() || (matrix.array() > 1.0).any())
            throw std::invalid_argument("SelectionMatrix: relaxed entries must lie in [0,1]");
    }
    else if (!is_valid_binary_selection(matrix))
    {
        throw std::invalid_argument("SelectionMatrix: binary selection violates the assignment constraints");
    }
}

QuantizerModel quantizer_params(int bits)
{
    if (bits <= 0)
        throw std::domain_error("quantizer_params: bits must be positive");
    QuantizerModel q;
    q.bits = bits;
    if (bits <= 5)
        q.distortion = lloyd_max_distortion[bits - 1];
    else
        q.distortion = std::numbers::pi * std::sqrt(3.0) / 2.0 * std::pow(2.0, -2.0 * bits);
    q.gain = 1.0 - q.distortion;
    return q;
}

Layout DesignPoint::layout() const
{
    return Layout(static_cast<int>(powers.size()), static_cast<int>(selection.rows()),
                  static_cast<int>(selection.cols()));
}

CVector DesignPoint::stack() const
{
    const Layout L = layout();
    if (combiner.rows() != L.rf_chains || combiner.cols() != L.rf_chains || beamformers.rows() != L.rf_chains ||
        beamformers.cols() != L.users)
        throw std::invalid_argument("DesignPoint: inconsistent block shapes");

    CVector x(L.size());
    x.segment(L.p_offset(), L.users) = powers.cast<cplx>();
    x.segment(L.c_offset(), L.codewords * L.rf_chains) =
        Eigen::Map<const RVector>(selection.data(), selection.size()).cast<cplx>();
    x.segment(L.v_offset(), L.rf_chains * L.rf_chains) = Eigen::Map<const CVector>(combiner.data(), combiner.size());
    x.segment(L.w_offset(), L.rf_chains * L.users) = Eigen::Map<const CVector>(beamformers.data(), beamformers.size());
    return x;
}

DesignPoint DesignPoint::unstack(const CVector &x, const Layout &L)
{
    if (x.size() != L.size())
        throw std::invalid_argument("DesignPoint::unstack: vector length does not match layout");
    DesignPoint d;
    d.powers = x.segment(L.p_offset(), L.users).real();
    RVector c = x.segment(L.c_offset(), L.codewords * L.rf_chains).real();
    d.selection = Eigen::Map<const RMatrix>(c.data(), L.codewords, L.rf_chains);
    d.combiner = Eigen::Map<const CMatrix>(x.data() + L.v_offset(), L.rf_chains, L.rf_chains);
    d.beamformers = Eigen::Map<const CMatrix>(x.data() + L.w_offset(), L.rf_chains, L.users);
    return d;
}

SystemModel::SystemModel(const Dimensions &d, int bits, double noise_power)
    : dims(d), codebook(dft_codebook(d.antennas, d.codewords)), quantizer(quantizer_params(bits)),
      noise_power_mw(noise_power)
{
    d.validate();
    if (!(noise_power >= 0.0))
        throw std::invalid_argument("SystemModel: noise power must be nonnegative");
    gram = codebook.matrix.adjoint() * codebook.matrix;
}

BeamspaceSample to_beamspace(const SystemModel &model, const ChannelSample &h)
{
    if (h.antennas() != model.codebook.antennas())
        throw std::invalid_argument("to_beamspace: channel has wrong antenna count");
    return {model.codebook.matrix.adjoint() * h.matrix, h.frame_index};
}

std::vector<BeamspaceSample> to_beamspace(const SystemModel &model, std::span<const ChannelSample> samples)
{
    std::vector<BeamspaceSample> out;
    out.reserve(samples.size());
    for (const auto &s : samples)
        out.push_back(to_beamspace(model, s));
    return out;
}

CMatrix quantization_noise_cov(const CMatrix &rf_combiner, const CMatrix &channel, const RVector &powers,
                               double noise_power, double gain)
{
    if (channel.cols() != powers.size() || rf_combiner.rows() != channel.rows())
        throw std::invalid_argument("quantization_noise_cov: dimension mismatch");
    const CMatrix g = rf_combiner.adjoint() * channel; // S x K
    const Eigen::Index S = rf_combiner.cols();
    CMatrix rq = CMatrix::Zero(S, S);
    for (Eigen::Index s = 0; s < S; ++s)
    {
        double d = noise_power * rf_combiner.col(s).squaredNorm();
        for (Eigen::Index i = 0; i < powers.size(); ++i)
            d += powers(i) * std::norm(g(s, i));
        rq(s, s) = gain * (1.0 - gain) * d;
    }
    return rq;
}

RVector RateTerms::sinr() const
{
    RVector out(signal.size());
    for (Eigen::Index k = 0; k < signal.size(); ++k)
    {
        const double den = interference(k) + noise(k) + quantization(k);
        if (signal(k) == 0.0)
            out(k) = 0.0;
        else if (den == 0.0)
            out(k) = std::numeric_limits<double>::infinity();
        else
            out(k) = signal(k) / den;
    }
    return out;
}

RVector RateTerms::rates() const
{
    return sinr().unaryExpr([](double s) { return std::log2(1.0 + s); });
}

RateTerms rate_terms(const DesignPoint &x, const BeamspaceSample &b, const SystemModel &model)
{
    const int K = static_cast<int>(x.powers.size());
    const int S = static_cast<int>(x.selection.cols());
    if (b.beams.rows() != x.selection.rows() || b.beams.cols() != K)
        throw std::invalid_argument("rate_terms: sample does not match the design point");

    const double g = model.gain();
    const double s2 = model.noise_power_mw;
    const CMatrix ct = x.selection.transpose().cast<cplx>();
    const CMatrix G = ct * b.beams;                                        // S x K
    const CMatrix uu = ct * model.gram * x.selection.cast<cplx>();       // S x S
    const CMatrix Z = x.combiner * x.beamformers;                          // S x K
    const CMatrix A = Z.adjoint() * G;                                     // (k,i) = z_k^H g_i

    RVector d(S);
    for (int s = 0; s < S; ++s)
    {
        double acc = s2 * uu(s, s).real();
        for (int i = 0; i < K; ++i)
            acc += x.powers(i) * std::norm(G(s, i));
        d(s) = acc;
    }

    RateTerms t;
    t.signal.resize(K);
    t.interference.resize(K);
    t.noise.resize(K);
    t.quantization.resize(K);
    for (int k = 0; k < K; ++k)
    {
        double itf = 0.0;
        for (int i = 0; i < K; ++i)
            if (i != k)
                itf += x.powers(i) * std::norm(A(k, i));
        t.signal(k) = g * g * x.powers(k) * std::norm(A(k, k));
        t.interference(k) = g * g * itf;
        t.noise(k) = s2 * g * g * Z.col(k).dot(uu * Z.col(k)).real();
        t.quantization(k) = g * (1.0 - g) * (Z.col(k).cwiseAbs2().array() * d.array()).sum();
    }
    return t;
}

RVector instantaneous_rates(const DesignPoint &x, const BeamspaceSample &b, const SystemModel &model)
{
    return rate_terms(x, b, model).rates();
}

double sinr(const DesignPoint &x, const ChannelSample &h, const SystemModel &model, int user)
{
    if (user < 0 || user >= x.powers.size())
        throw std::out_of_range("sinr: user index");
    return rate_terms(x, to_beamspace(model, h), model).sinr()(user);
}

double instantaneous_rate(const DesignPoint &x, const ChannelSample &h, const SystemModel &model, int user)
{
    return std::log2(1.0 + sinr(x, h, model, user));
}

double average_rate(const DesignPoint &x, std::span<const ChannelSample> samples, const SystemModel &model,
                    int user)
{
    if (samples.empty())
        throw std::invalid_argument("average_rate: empty sample set");
    double acc = 0.0;
    for (const auto &h : samples)
        acc += instantaneous_rate(x, h, model, user);
    return acc / static_cast<double>(samples.size());
}

RVector average_rates(const DesignPoint &x, std::span<const BeamspaceSample> samples, const SystemModel &model)
{
    if (samples.empty())
        throw std::invalid_argument("average_rates: empty sample set");
    RVector acc = RVector::Zero(x.powers.size());
    for (const auto &b : samples)
        acc += instantaneous_rates(x, b, model);
    return acc / static_cast<double>(samples.size());
}

} // namespace qmimo
