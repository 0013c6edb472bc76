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

#include "qmimo/gradient.hpp"

#include <cmath>
#include <numbers>

namespace qmimo {

namespace {

void check_point(const DesignPoint &x, const SystemModel &model)
{
    if (!(model.noise_power_mw > 0.0))
        throw std::invalid_argument("rate_gradient: noise power must be positive");
    if ((x.powers.array() < 0.0).any())
        throw std::invalid_argument("rate_gradient: negative power");
    if ((x.selection.array() < 0.0).any() || (x.selection.array() > 1.0).any())
        throw std::invalid_argument("rate_gradient: selection entry outside [0,1]");
}

// Blockwise gradient of a real function of (p, C, z_k).
struct Partials
{
    RVector p;
    RMatrix c;
    CVector z;
};

} // namespace

CMatrix rate_gradients(const DesignPoint &x, const BeamspaceSample &b, const SystemModel &model)
{
    check_point(x, model);
    const Layout L = x.layout();
    const int K = L.users;
    const int S = L.rf_chains;
    const int N = L.codewords;
    if (b.beams.rows() != N || b.beams.cols() != K)
        throw std::invalid_argument("rate_gradient: sample does not match the design point");

    const double g = model.gain();
    const double g2 = g * g;
    const double gq = g * (1.0 - g);
    const double s2 = model.noise_power_mw;

    const CMatrix cc = x.selection.cast<cplx>();
    const CMatrix G = cc.transpose() * b.beams;          // S x K
    const CMatrix gamma_c = model.gram * cc;             // N x S, Gram times C
    const CMatrix uu = cc.transpose() * gamma_c;         // S x S
    const CMatrix Z = x.combiner * x.beamformers;        // S x K
    const CMatrix A = Z.adjoint() * G;                   // K x K
    const RMatrix absG2 = G.cwiseAbs2();

    const RVector d = absG2 * x.powers + s2 * uu.diagonal().real();
    // d(d_s)/d(C_ns) / 2, shared by every user.
    const RMatrix dd_dc = (b.beams * x.powers.asDiagonal() * G.adjoint()).real() + s2 * gamma_c.real();

    CMatrix out = CMatrix::Zero(L.size(), K);
    for (int k = 0; k < K; ++k)
    {
        const CVector z = Z.col(k);
        const RVector z2 = z.cwiseAbs2();
        const CVector y = cc * z; // C z
        const CVector gy = model.gram * y;

        // Interference-plus-noise part F_Dn (omega_k = 0).
        Partials dn;
        dn.p = gq * (absG2.transpose() * z2);
        CVector t = CVector::Zero(N);
        dn.z = 2.0 * s2 * g2 * (uu * z) + 2.0 * gq * d.cast<cplx>().cwiseProduct(z);
        for (int i = 0; i < K; ++i)
        {
            if (i == k)
                continue;
            const cplx wa = x.powers(i) * std::conj(A(k, i));
            dn.p(i) += g2 * std::norm(A(k, i));
            dn.z += 2.0 * g2 * wa * G.col(i);
            t += wa * b.beams.col(i);
        }
        dn.c = 2.0 * g2 * (t * z.adjoint()).real() + 2.0 * s2 * g2 * (gy * z.adjoint()).real() +
               2.0 * gq * (dd_dc.array().rowwise() * z2.transpose().array()).matrix();

        // Signal part gamma^2 p_k |a_k|^2.
        const cplx ws = x.powers(k) * std::conj(A(k, k));
        Partials sg;
        sg.p = RVector::Zero(K);
        sg.p(k) = g2 * std::norm(A(k, k));
        sg.z = 2.0 * g2 * ws * G.col(k);
        sg.c = 2.0 * g2 * ((ws * b.beams.col(k)) * z.adjoint()).real();

        const double signal = g2 * x.powers(k) * std::norm(A(k, k));
        double interf = 0.0;
        for (int i = 0; i < K; ++i)
            if (i != k)
                interf += x.powers(i) * std::norm(A(k, i));
        const double dn_val = g2 * interf + s2 * g2 * z.dot(uu * z).real() + gq * z2.dot(d);
        const double total = dn_val + signal;
        const double a_sig = 1.0 / (total * std::numbers::ln2);
        const double a_dn = (1.0 / total - 1.0 / dn_val) / std::numbers::ln2;

        const RVector gp = a_sig * sg.p + a_dn * dn.p;
        const RMatrix gc = a_sig * sg.c + a_dn * dn.c;
        const CVector gz = a_sig * sg.z + a_dn * dn.z;

        auto col = out.col(k);
        col.segment(L.p_offset(), K) = gp.cast<cplx>();
        col.segment(L.c_offset(), N * S) = Eigen::Map<const RVector>(gc.data(), gc.size()).cast<cplx>();
        const CMatrix gv = gz * x.beamformers.col(k).adjoint(); // S x S
        col.segment(L.v_offset(), S * S) = Eigen::Map<const CVector>(gv.data(), gv.size());
        col.segment(L.w_offset() + k * S, S) = x.combiner.adjoint() * gz;
    }
    return out;
}

CVector rate_gradient(const DesignPoint &x, const BeamspaceSample &b, const SystemModel &model, int user)
{
    if (user < 0 || user >= x.powers.size())
        throw std::out_of_range("rate_gradient: user index");
    return rate_gradients(x, b, model).col(user);
}

} // namespace qmimo
