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

#include "instances.hpp"

#include "qmimo/baselines.hpp"
#include "qmimo/experiment.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace qmimo;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig cfg;
    cfg.dims = Dimensions{16, 4, 8, 2};
    cfg.frames = 20;
    cfg.eval_samples = 100;
    cfg.burn_in = 20;
    cfg.replications = 1;
    return cfg;
}

} // namespace

TEST_CASE("scheme block freezing")
{
    CHECK_FALSE(SchemeSpec::of(Scheme::shc).frozen.selection);
    CHECK_FALSE(SchemeSpec::of(Scheme::shc).frozen.combiner);
    CHECK(SchemeSpec::of(Scheme::mm).frozen.selection);
    CHECK(SchemeSpec::of(Scheme::random).frozen.selection);
    CHECK_FALSE(SchemeSpec::of(Scheme::random).frozen.beamformers);
    CHECK(SchemeSpec::of(Scheme::zf).frozen.combiner);
    CHECK(SchemeSpec::of(Scheme::zf).frozen.beamformers);
    CHECK_FALSE(SchemeSpec::of(Scheme::mrc).frozen.selection);
    CHECK(SchemeSpec::of(Scheme::mrc).frozen.beamformers);
}

TEST_CASE("magnitude-maximising selection")
{
    const CMatrix D = dft_codebook(8, 8).matrix;
    SUBCASE("N = S selects every codeword")
    {
        Rng rng(1);
        std::vector<ChannelSample> h{{instances::complex_gaussian(rng, 8, 2), 0}};
        const RMatrix c = mm_select(D, h, 8).matrix;
        CHECK(is_valid_binary_selection(c));
        CHECK(c.sum() == 8.0);
        CHECK((c.rowwise().sum().array() == 1.0).all());
    }
    SUBCASE("a channel equal to one codeword selects it first")
    {
        std::vector<ChannelSample> h{{D.col(3), 0}};
        const RMatrix c = mm_select(D, h, 2).matrix;
        CHECK(c(3, 0) == 1.0);
    }
    SUBCASE("matches exhaustive scoring")
    {
        Rng rng(2);
        const CMatrix D16 = dft_codebook(16, 8).matrix;
        for (int trial = 0; trial < 50; ++trial)
        {
            std::vector<ChannelSample> h;
            for (int i = 0; i < 5; ++i)
                h.push_back({instances::complex_gaussian(rng, 16, 3), 0});
            std::vector<std::pair<double, int>> score;
            for (int n = 0; n < 8; ++n)
            {
                double acc = 0.0;
                for (const auto &s : h)
                    for (int k = 0; k < 3; ++k)
                        acc += std::norm(D16.col(n).dot(s.matrix.col(k)));
                score.push_back({-acc / 5.0, n});
            }
            std::sort(score.begin(), score.end());
            const RMatrix c = mm_select(D16, h, 4).matrix;
            CHECK(is_valid_binary_selection(c));
            for (int s = 0; s < 4; ++s)
                CHECK(c(score[s].second, s) == 1.0);
        }
    }
    Rng rng(3);
    std::vector<ChannelSample> h{{instances::complex_gaussian(rng, 8, 2), 0}};
    CHECK_THROWS(mm_select(dft_codebook(8, 4).matrix, h, 5));
    CHECK_THROWS(mm_select(D, std::vector<ChannelSample>{}, 2));
}

TEST_CASE("user-centric selection gives each user a beam")
{
    const CMatrix D = dft_codebook(16, 16).matrix;
    // User 0 sits exactly on codeword 5, user 1 on codeword 9 but 20 dB weaker.
    CMatrix H(16, 2);
    H.col(0) = D.col(5);
    H.col(1) = 0.1 * D.col(9);
    std::vector<ChannelSample> h{{H, 0}};
    const RMatrix c = user_centric_select(D, h, 3).matrix;
    CHECK(is_valid_binary_selection(c));
    CHECK(c(9, 0) == 1.0); // the weaker user chooses first
    CHECK(c(5, 1) == 1.0);
    CHECK_THROWS(user_centric_select(D, h, 1));
}

TEST_CASE("random selection")
{
    Rng rng(4);
    std::vector<int> hits(10, 0);
    for (int i = 0; i < 10000; ++i)
    {
        const RMatrix c = random_select(rng, 10, 4).matrix;
        REQUIRE(is_valid_binary_selection(c));
        for (int n = 0; n < 10; ++n)
            hits[n] += c.row(n).sum() > 0.0;
    }
    // Each codeword is used with probability S/N = 0.4.
    for (int n : hits)
        CHECK(std::abs(n / 10000.0 - 0.4) < 0.03);
    Rng a(9), b(9);
    CHECK(random_select(a, 12, 5).matrix == random_select(b, 12, 5).matrix);
    const RMatrix perm = random_select(a, 5, 5).matrix;
    CHECK((perm.rowwise().sum().array() == 1.0).all());
    CHECK_THROWS(random_select(a, 3, 4));
}

TEST_CASE("zero-forcing digital stage")
{
    {
        const auto [V, W] = zf_combiner(CMatrix::Identity(3, 3));
        CHECK((W - CMatrix::Identity(3, 3)).norm() < 1e-14);
        CHECK((V - CMatrix::Identity(3, 3)).norm() < 1e-14);
    }
    {
        CMatrix h = CMatrix::Zero(4, 2);
        h(0, 0) = 2.0;
        h(2, 1) = 2.0;
        const auto [V, W] = zf_combiner(h);
        CHECK(std::abs(W(0, 0) - 0.5) < 1e-14);
        CHECK(std::abs(W(2, 1) - 0.5) < 1e-14);
        CHECK((W.adjoint() * h - CMatrix::Identity(2, 2)).norm() < 1e-14);
    }
    Rng rng(5);
    for (int i = 0; i < 50; ++i)
    {
        const CMatrix h = instances::complex_gaussian(rng, 6, 4);
        const auto [V, W] = zf_combiner(h);
        CHECK((W.adjoint() * V.adjoint() * h - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    }
    CMatrix dep = instances::complex_gaussian(rng, 4, 3);
    dep.col(2) = dep.col(0) * cplx(0.0, 2.0);
    try
    {
        zf_combiner(dep);
        CHECK(false);
    }
    catch (const std::invalid_argument &e)
    {
        // Column 2 is twice column 0, so either one may be reported.
        const std::string msg = e.what();
        CHECK(msg.find("dependent columns") != std::string::npos);
        CHECK((msg.find('0') != std::string::npos || msg.find('2') != std::string::npos));
    }
}

TEST_CASE("matched-filter digital stage")
{
    {
        CMatrix h = CMatrix::Zero(3, 1);
        h(0, 0) = 1.0;
        const auto [V, W] = mrc_combiner(h);
        CHECK((W - h).norm() < 1e-15);
        const auto [V2, W2] = mrc_combiner(7.5 * h);
        CHECK((W2 - h).norm() < 1e-15);
    }
    Rng rng(6);
    for (int i = 0; i < 20; ++i)
    {
        const CMatrix h = instances::complex_gaussian(rng, 5, 3);
        const auto [V, W] = mrc_combiner(h);
        for (int k = 0; k < 3; ++k)
        {
            // Top singular direction of the rank-one h_k h_k^H.
            Eigen::JacobiSVD<CMatrix> svd(h.col(k) * h.col(k).adjoint(), Eigen::ComputeFullU);
            const double best = std::abs(svd.matrixU().col(0).dot(h.col(k)));
            CHECK(W.col(k).norm() == doctest::Approx(1.0));
            CHECK(std::abs(W.col(k).dot(h.col(k))) == doctest::Approx(best).epsilon(1e-12));
        }
    }
    CHECK_THROWS(mrc_combiner(CMatrix::Zero(3, 2)));
}

TEST_CASE("statistical effective channel of a rank-one user")
{
    // h_k = a_k * d_n with a_k ~ CN(0,1): the covariance of C^T D^H h_k is
    // rank one along the selected chain of codeword n.
    const Dimensions dims{8, 3, 8, 1};
    const SystemModel model(dims, 3, 1e-3);
    Rng rng(7);
    std::vector<ChannelSample> h;
    for (int i = 0; i < 400; ++i)
        h.push_back({model.codebook.matrix.col(2) * complex_normal(rng), 0});
    RMatrix c = RMatrix::Zero(8, 3);
    c(2, 1) = c(5, 0) = c(7, 2) = 1.0;
    const CMatrix heff = statistical_effective_channel(model, c, h);
    CHECK(heff.rows() == 3);
    CHECK(std::abs(heff(0, 0)) < 1e-12);
    CHECK(std::abs(heff(2, 0)) < 1e-12);
    CHECK(std::abs(heff(1, 0)) == doctest::Approx(model.gain()).epsilon(0.1));
}

TEST_CASE("long-term max-SINR design")
{
    Rng rng(64);
    const Dimensions d{16, 4, 8, 3};
    const SystemModel model(d, 3, 0.05);
    const double g = model.gain();
    const RMatrix C = random_select(rng, d.codewords, d.rf_chains).matrix;
    std::vector<BeamspaceSample> samples;
    for (int i = 0; i < 40; ++i)
    {
        ChannelSample h;
        h.matrix = instances::complex_gaussian(rng, d.antennas, d.users);
        samples.push_back(to_beamspace(model, h));
    }
    const RVector pmax = RVector::Constant(d.users, 10.0);
    const StatisticalDesign sd = statistical_max_sinr(model, C, samples, pmax, 0.5);

    // Long-term SINR of user k with beamformer w, built directly from the samples.
    auto ratio = [&](int k, const CVector &w) {
        double sig = 0.0, rest = 0.0;
        for (const auto &b : samples)
        {
            const CMatrix e = C.transpose().cast<cplx>() * b.beams;
            sig += g * g * sd.powers(k) * std::norm(w.dot(e.col(k)));
            for (int j = 0; j < d.users; ++j)
            {
                if (j != k)
                    rest += g * g * sd.powers(j) * std::norm(w.dot(e.col(j)));
                for (int s = 0; s < d.rf_chains; ++s)
                    rest += g * (1.0 - g) * std::norm(w(s)) * sd.powers(j) * std::norm(e(s, j));
            }
        }
        sig /= samples.size();
        rest /= samples.size();
        const CMatrix uu = C.transpose().cast<cplx>() * model.gram * C.cast<cplx>();
        rest += model.noise_power_mw * g * g * w.dot(uu * w).real();
        for (int s = 0; s < d.rf_chains; ++s)
            rest += g * (1.0 - g) * std::norm(w(s)) * model.noise_power_mw * uu(s, s).real();
        return sig / rest;
    };
    for (int k = 0; k < d.users; ++k)
    {
        CHECK(sd.powers(k) >= 0.0);
        CHECK(sd.powers(k) <= pmax(k));
        CHECK(ratio(k, sd.beamformers.col(k)) == doctest::Approx(sd.sinr(k)).epsilon(1e-9));
        // Powers below the limit sit on the target.
        if (sd.powers(k) < pmax(k))
            CHECK(sd.sinr(k) == doctest::Approx(0.5).epsilon(1e-3));
        for (int t = 0; t < 50; ++t)
            CHECK(ratio(k, instances::complex_gaussian(rng, d.rf_chains, 1).col(0)) <= sd.sinr(k) * (1.0 + 1e-9));
    }
    CHECK(sd.combiner.isApprox(CMatrix::Identity(d.rf_chains, d.rf_chains)));
    CHECK(statistical_max_sinr(model, C, samples, pmax, 0.0).powers.isZero());
    CHECK_THROWS_AS(statistical_max_sinr(model, C, {}, pmax, 0.5), std::invalid_argument);
}

TEST_CASE("frozen blocks survive the run bit for bit")
{
    ExperimentConfig cfg = small_config();
    const SystemModel model(cfg.dims, cfg.bits, cfg.sigma2_mw());
    for (Scheme s : {Scheme::mm, Scheme::random, Scheme::zf, Scheme::mrc})
    {
        const Scenario sc = make_scenario(cfg, 3);
        const SchemeSetup setup = prepare_scheme(cfg, model, sc, 3, s);
        ChannelStream train = open_stream(cfg, sc, 3, stream::training);
        const RsscaResult r = run_rssca(cfg, model, train, setup.start, setup.frozen);
        CHECK(is_valid_binary_selection(r.solution.selection));
        if (setup.frozen.selection)
            CHECK(r.solution.selection == setup.start.selection);
        if (setup.frozen.combiner)
            CHECK(r.solution.combiner == setup.start.combiner);
        if (setup.frozen.beamformers)
            CHECK(r.solution.beamformers == setup.start.beamformers);
        if (s == Scheme::mm)
        {
            ChannelStream burn = open_stream(cfg, sc, 3, stream::burn_in);
            const auto samples = burn.take(static_cast<std::size_t>(cfg.burn_in));
            CHECK(r.solution.selection == mm_select(model.codebook.matrix, samples, cfg.dims.rf_chains).matrix);
        }
    }
}

TEST_CASE("power-only subproblem against bisection")
{
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial)
    {
        const Layout L(1, 3, 2);
        auto inst = instances::random_subproblem(rng, L, false, true);
        inst.set.freeze_combiner = inst.set.freeze_beamformers = true;
        SurrogateSet &s = inst.surrogates;
        // f(p) is convex in p alone; find the smallest feasible p by bisection.
        auto f = [&](double p) {
            CVector x = s.center;
            x(0) = p;
            return s.value(0, x);
        };
        // Minimiser of f over [0, p_max] separates the two monotone pieces.
        const double pmin = std::clamp(s.center(0).real() - s.slopes(0, 0).real() / (2.0 * s.curvature(0)), 0.0, 1.0);
        if (f(pmin) > -0.05)
            s.offset(0) -= f(pmin) + 0.05;
        const SubproblemSolution sol = solve_subproblem(s, inst.set, {});
        double lo = 0.0, hi = pmin;
        if (f(0.0) <= 0.0)
            hi = 0.0;
        for (int i = 0; i < 200 && hi > 0.0; ++i)
        {
            const double mid = 0.5 * (lo + hi);
            (f(mid) <= 0.0 ? hi : lo) = mid;
        }
        CHECK(sol.objective == doctest::Approx(hi).epsilon(1e-8));
    }
}
