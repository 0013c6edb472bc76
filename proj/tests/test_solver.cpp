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

#include "oracles.hpp"
#include "instances.hpp"

#include "qmimo/dual.hpp"
#include "qmimo/gradient.hpp"
#include "qmimo/rounding.hpp"
#include "qmimo/rssca.hpp"
#include "qmimo/schedules.hpp"
#include "qmimo/surrogate.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qmimo;

namespace {

BeamspaceSample random_sample(Rng &rng, const SystemModel &model)
{
    ChannelSample h;
    h.matrix = instances::complex_gaussian(rng, model.dims.antennas, model.dims.users);
    return to_beamspace(model, h);
}

double gradient_error(const DesignPoint &x, const BeamspaceSample &b, const SystemModel &model, int k)
{
    const Layout L = x.layout();
    auto rate = [&](const CVector &v) { return instantaneous_rates(DesignPoint::unstack(v, L), b, model)(k); };
    const CVector fd = oracle::central_difference(rate, x.stack(), L.real_size(), 1e-6);
    const CVector eta = rate_gradient(x, b, model, k);
    return (eta - fd).norm() / fd.norm();
}

} // namespace

TEST_CASE("rate gradient: scalar power derivative")
{
    SystemModel model(Dimensions{1, 1, 1, 1}, 3, 1.0);
    model.quantizer.gain = 1.0;
    model.quantizer.distortion = 0.0;
    DesignPoint x;
    x.powers = RVector::Zero(1);
    x.selection = RMatrix::Ones(1, 1);
    x.combiner = CMatrix::Ones(1, 1);
    x.beamformers = CMatrix::Ones(1, 1);
    ChannelSample h{CMatrix::Ones(1, 1), 0};
    const CVector g = rate_gradient(x, to_beamspace(model, h), model, 0);
    CHECK(g(0).real() == doctest::Approx(1.0 / std::numbers::ln2).epsilon(1e-12));
}

TEST_CASE("rate gradient matches central differences")
{
    Rng rng(31);
    const Dimensions dims{16, 4, 8, 3};
    const SystemModel model(dims, 3, 0.05);
    double worst = 0.0;
    for (int i = 0; i < 30; ++i)
    {
        const DesignPoint x = instances::random_design(rng, Layout(dims), 1.0);
        const BeamspaceSample b = random_sample(rng, model);
        for (int k = 0; k < 3; ++k)
            worst = std::max(worst, gradient_error(x, b, model, k));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("rate gradient: radial beamformer direction is flat")
{
    Rng rng(32);
    const Dimensions dims{16, 4, 8, 3};
    const SystemModel model(dims, 2, 0.05);
    const Layout L(dims);
    const DesignPoint x = instances::random_design(rng, L, 1.0);
    const BeamspaceSample b = random_sample(rng, model);
    const CVector eta = rate_gradient(x, b, model, 1);
    CVector radial = CVector::Zero(L.size());
    radial.segment(L.w_offset() + 1 * 4, 4) = x.beamformers.col(1);
    CHECK(std::abs(eta.dot(radial).real()) < 1e-10 * eta.norm() * radial.norm());
    CHECK(eta.segment(L.w_offset() + 4, 4).norm() > 0.0);
}

TEST_CASE("rate gradient preconditions")
{
    Rng rng(33);
    const Dimensions dims{8, 2, 4, 2};
    const SystemModel model(dims, 3, 0.1);
    DesignPoint x = instances::random_design(rng, Layout(dims), 1.0);
    const BeamspaceSample b = random_sample(rng, model);
    x.powers(0) = -0.1;
    CHECK_THROWS(rate_gradient(x, b, model, 0));
    x.powers(0) = 0.1;
    x.selection(0, 0) = 1.2;
    CHECK_THROWS(rate_gradient(x, b, model, 0));
    SystemModel silent(dims, 3, 0.0);
    x.selection(0, 0) = 0.2;
    CHECK_THROWS(rate_gradient(x, b, silent, 0));
}

TEST_CASE("step schedules")
{
    const StepSchedules s = default_schedules();
    CHECK(s.alpha(0) == 1.0);
    CHECK(s.beta(0) == 1.0);
    CHECK(s.beta(124) == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(s.alpha(15) == doctest::Approx(0.25));
    CHECK(s.alpha(1'000'000) / s.beta(1'000'000) < 0.1 * s.alpha(0) / s.beta(0));
    CHECK_NOTHROW(validate_schedules(s));

    StepSchedules bad = s;
    bad.alpha = [](long) { return 1.5; };
    CHECK_THROWS(validate_schedules(bad));
    bad.alpha = [](long l) { return l % 2 ? 0.5 : 0.6; };
    CHECK_THROWS(validate_schedules(bad));
    bad.alpha = [](long) { return 0.5; }; // constant: alpha/beta grows without bound
    CHECK_THROWS(validate_schedules(bad));
}

TEST_CASE("surrogate tracking")
{
    Rng rng(34);
    const Dimensions dims{8, 2, 4, 2};
    const SystemModel model(dims, 3, 0.1);
    const Layout L(dims);
    const DesignPoint x = instances::random_design(rng, L, 1.0);
    const RVector targets = RVector::Constant(2, 1.0), tau = RVector::Constant(2, 0.3);

    SUBCASE("beta = 1 replaces the tracked gradient")
    {
        SurrogateState s = make_surrogate_state(L, targets, tau, 10);
        const BeamspaceSample b1 = random_sample(rng, model), b2 = random_sample(rng, model);
        update_surrogate(s, x, b1, model, 1.0);
        update_surrogate(s, x, b2, model, 1.0);
        CHECK((s.tracked_gradients + rate_gradients(x, b2, model)).norm() < 1e-14);
    }
    SUBCASE("recursive combination and sign")
    {
        SurrogateState s = make_surrogate_state(L, targets, tau, 10);
        const BeamspaceSample b1 = random_sample(rng, model), b2 = random_sample(rng, model);
        update_surrogate(s, x, b1, model, 1.0);
        update_surrogate(s, x, b2, model, 0.25);
        const CMatrix expect = -(0.75 * rate_gradients(x, b1, model) + 0.25 * rate_gradients(x, b2, model));
        CHECK((s.tracked_gradients - expect).norm() < 1e-12 * expect.norm());
        CHECK(s.iteration == 2);
    }
    SUBCASE("all-sample average")
    {
        SurrogateState s = make_surrogate_state(L, targets, tau, 10);
        const BeamspaceSample b1 = random_sample(rng, model), b2 = random_sample(rng, model);
        update_surrogate(s, x, b1, model, 1.0);
        update_surrogate(s, x, b2, model, 0.5);
        const RVector mean = 0.5 * (instantaneous_rates(x, b1, model) + instantaneous_rates(x, b2, model));
        CHECK((s.sample_avg_rates - mean).norm() < 1e-13);
        // Same sample repeated: rhat equals that sample's rate.
        SurrogateState t = make_surrogate_state(L, targets, tau, 10);
        for (int i = 0; i < 3; ++i)
            update_surrogate(t, x, b1, model, 1.0 / (i + 1));
        CHECK((t.sample_avg_rates - instantaneous_rates(x, b1, model)).norm() < 1e-13);
    }
    SUBCASE("capacity is enforced")
    {
        SurrogateState s = make_surrogate_state(L, targets, tau, 2);
        update_surrogate(s, x, random_sample(rng, model), model, 1.0);
        update_surrogate(s, x, random_sample(rng, model), model, 1.0);
        CHECK_THROWS(update_surrogate(s, x, random_sample(rng, model), model, 1.0));
    }
    SUBCASE("surrogate value")
    {
        SurrogateState s = make_surrogate_state(L, targets, tau, 10);
        update_surrogate(s, x, random_sample(rng, model), model, 1.0);
        const CVector c = x.stack();
        CHECK(surrogate_value(s, 0, c) == doctest::Approx(1.0 - s.sample_avg_rates(0)));
        CVector y = c;
        for (Eigen::Index t = L.v_offset(); t < y.size(); ++t)
            y(t) += instances::complex_gaussian(rng, 1, 1)(0, 0);
        for (int k = 0; k < 2; ++k)
        {
            const CVector d = y - c;
            double lin = 0.0, sq = 0.0;
            for (Eigen::Index t = 0; t < d.size(); ++t)
            {
                lin += (std::conj(s.tracked_gradients(t, k)) * d(t)).real();
                sq += std::norm(d(t));
            }
            CHECK(surrogate_value(s, k, y) == doctest::Approx(1.0 - s.sample_avg_rates(k) + lin + 0.3 * sq));
        }
        // Unit displacement with zero slope and gamma = rhat leaves tau.
        SurrogateSet plain = s.surrogates();
        plain.slopes.setZero();
        plain.offset.setZero();
        CVector e = c;
        e(L.v_offset()) += 1.0;
        CHECK(plain.value(1, e) == doctest::Approx(0.3));
    }
    CHECK_THROWS(make_surrogate_state(L, targets, RVector::Constant(2, 0.0)));
}

TEST_CASE("closed-form coordinate minimiser")
{
    CHECK(closed_form_coordinate(1.0, -2.0, 0.0, 1.0) == 1.0);
    CHECK(closed_form_coordinate(2.0, -2.0, 0.0, 1.0) == doctest::Approx(0.5));
    CHECK(closed_form_coordinate(1.0, 3.0, 0.0, 1.0) == 0.0);
    const cplx z = closed_form_coordinate(0.5, cplx(1.0, -2.0));
    CHECK(std::abs(z - cplx(-1.0, -2.0)) < 1e-15);
    CHECK_THROWS(closed_form_coordinate(0.0, 1.0, 0.0, 1.0));
}

TEST_CASE("simplex projection")
{
    const RVector p = project_simplex((RVector(3) << 0.2, 2.0, -1.0).finished());
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p(1) == doctest::Approx(1.0));
    const RVector q = project_simplex((RVector(2) << 0.3, 0.3).finished());
    CHECK(q(0) == doctest::Approx(0.5));
}

TEST_CASE("subproblem: inactive constraint gives zero multipliers")
{
    const Layout L(1, 2, 1);
    SurrogateSet s;
    DesignPoint c = initial_point(L, RVector::Constant(1, 1.0));
    s.center = c.stack();
    s.slopes = CMatrix::Zero(L.size(), 1);
    s.slopes(0, 0) = -1.0;
    s.curvature = RVector::Constant(1, 1.0);
    s.offset = RVector::Constant(1, -2.0); // satisfied even at p = 0
    const FeasibleSet set(L, RVector::Constant(1, 1.0));
    const SubproblemSolution sol = solve_subproblem(s, set, {});
    CHECK(sol.dual.rate_multipliers(0) == 0.0);
    CHECK(sol.x(0).real() == 0.0);
    CHECK(sol.objective == 0.0);
}

TEST_CASE("subproblem matches the augmented Lagrangian oracle")
{
    Rng rng(35);
    for (int i = 0; i < 8; ++i)
    {
        const Layout L(1 + i % 3, 3 + i % 2, 2 + i % 2);
        const auto inst = instances::random_subproblem(rng, L, i % 2 == 1, i % 4 == 3);
        const SubproblemSolution ours = solve_subproblem(inst.surrogates, inst.set, {});
        oracle::AugmentedLagrangian alm(inst.surrogates, inst.set);
        const auto ref = alm.solve();
        CHECK(ours.objective > 0.0);
        CHECK(std::abs(ours.objective - ref.objective) <= 1e-6 * std::max(ours.objective, ref.objective));
        CHECK(inst.surrogates.values(ours.x).maxCoeff() <= 1e-6);
        CHECK(inst.set.contains(ours.x, 1e-9));
    }
}

TEST_CASE("subproblem: subgradient method agrees with Newton")
{
    Rng rng(36);
    const Layout L(2, 3, 2);
    const auto inst = instances::random_subproblem(rng, L, false);
    DualOptions sub;
    sub.method = DualMethod::projected_subgradient;
    sub.max_subgradient_iterations = 200000;
    sub.subgradient_tolerance = 1e-5;
    const SubproblemSolution a = solve_subproblem(inst.surrogates, inst.set, {});
    try
    {
        const SubproblemSolution b = solve_subproblem(inst.surrogates, inst.set, sub);
        CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-2));
    }
    catch (const DualNonConvergence &e)
    {
        // The best iterate is still carried by the error.
        CHECK(e.best().x.size() == L.size());
        CHECK(e.best().dual_value <= a.dual_value + 1e-9);
    }
}

TEST_CASE("feasibility problem")
{
    SUBCASE("centered quadratics: xi = max(gamma - rhat)")
    {
        Rng rng(37);
        const Layout L(3, 4, 2);
        const auto inst = instances::random_subproblem(rng, L, false);
        SurrogateSet s = inst.surrogates;
        s.slopes.setZero();
        s.offset = (RVector(3) << 0.2, -0.1, 0.05).finished();
        const SubproblemSolution sol = solve_feasibility(s, inst.set, {});
        CHECK(sol.objective == doctest::Approx(0.2).epsilon(1e-9));
        CHECK((sol.x - s.center).norm() < 1e-6);
    }
    SUBCASE("single user: projected unconstrained minimiser")
    {
        const Layout L(1, 1, 1);
        SurrogateSet s;
        s.center = initial_point(L, RVector::Constant(1, 1.0)).stack();
        s.slopes = CMatrix::Zero(L.size(), 1);
        s.slopes(0, 0) = -4.0; // p minimiser at 0.5 + 2 -> clamped to 1
        s.slopes(L.v_offset(), 0) = cplx(0.2, -0.4);
        s.curvature = RVector::Constant(1, 1.0);
        s.offset = RVector::Constant(1, 0.3);
        const FeasibleSet set(L, RVector::Constant(1, 1.0));
        const SubproblemSolution sol = solve_feasibility(s, set, {});
        CHECK(sol.x(0).real() == doctest::Approx(1.0));
        CHECK(std::abs(sol.x(L.v_offset()) - (s.center(L.v_offset()) - cplx(0.1, -0.2))) < 1e-9);
        CHECK(sol.objective == doctest::Approx(s.value(0, sol.x)).epsilon(1e-12));
    }
    SUBCASE("two power coordinates against a dense grid")
    {
        Rng rng(38);
        for (int trial = 0; trial < 5; ++trial)
        {
            const Layout L(2, 2, 2);
            FeasibleSet set(L, RVector::Constant(2, 1.0));
            set.freeze_selection = set.freeze_combiner = set.freeze_beamformers = true;
            SurrogateSet s;
            DesignPoint c = instances::random_design(rng, L, 1.0);
            c.selection = RMatrix::Identity(2, 2);
            s.center = c.stack();
            s.slopes = CMatrix::Zero(L.size(), 2);
            for (int k = 0; k < 2; ++k)
                for (int i = 0; i < 2; ++i)
                    s.slopes(i, k) = i == k ? -instances::uniform(rng, 0.5, 3.0) : instances::uniform(rng, 0.0, 1.5);
            s.curvature = (RVector(2) << instances::uniform(rng, 0.2, 2.0), instances::uniform(rng, 0.2, 2.0)).finished();
            s.offset = (RVector(2) << instances::uniform(rng, -0.3, 0.6), instances::uniform(rng, -0.3, 0.6)).finished();
            const SubproblemSolution sol = solve_feasibility(s, set, {});

            // Dense grid, then repeatedly a dense grid on a shrinking window
            // around the best point found so far.
            auto worst = [&](double p0, double p1) {
                CVector x = s.center;
                x(0) = p0;
                x(1) = p1;
                return s.values(x).maxCoeff();
            };
            double best = 1e300, b0 = 0.0, b1 = 0.0;
            double lo0 = 0.0, lo1 = 0.0, width = 1.0;
            const int n = 200;
            for (int level = 0; level < 40; ++level)
            {
                double c0 = b0, c1 = b1;
                for (int i = 0; i <= n; ++i)
                    for (int j = 0; j <= n; ++j)
                    {
                        const double p0 = std::clamp(lo0 + width * i / n, 0.0, 1.0);
                        const double p1 = std::clamp(lo1 + width * j / n, 0.0, 1.0);
                        if (const double v = worst(p0, p1); v < best)
                            best = v, c0 = p0, c1 = p1;
                    }
                b0 = c0;
                b1 = c1;
                width *= 0.7;
                lo0 = b0 - 0.5 * width;
                lo1 = b1 - 0.5 * width;
            }
            INFO("trial " << trial << " solver " << sol.objective << " grid " << best << " at solver point "
                          << s.values(sol.x).maxCoeff() << " p " << sol.x(0) << " " << sol.x(1));
            CHECK(std::abs(sol.objective - best) < 1e-4);
            CHECK(sol.objective <= best + 1e-9);
        }
    }
}

TEST_CASE("dual solver input validation")
{
    const Layout L(1, 2, 1);
    SurrogateSet s;
    s.center = initial_point(L, RVector::Constant(1, 1.0)).stack();
    s.slopes = CMatrix::Zero(L.size(), 1);
    s.curvature = RVector::Constant(1, 1.0);
    s.offset = RVector::Constant(1, 0.5);
    s.metric = RVector::Constant(L.size() - 1, 1.0);
    const FeasibleSet set(L, RVector::Constant(1, 1.0));
    CHECK_THROWS(solve_feasibility(s, set, {}));
    s.metric = RVector::Constant(L.size(), -1.0);
    CHECK_THROWS(solve_feasibility(s, set, {}));
}

TEST_CASE("smooth update")
{
    CVector x(2), y(2);
    x << 0.0, cplx(1.0, 1.0);
    y << 2.0, cplx(3.0, -1.0);
    CHECK(smooth_update(x, y, 1.0) == y);
    const CVector h = smooth_update(x, y, 0.5);
    CHECK(h(0) == cplx(1.0, 0.0));
    CHECK(h(1) == cplx(2.0, 0.0));

    Rng rng(39);
    const Layout L(2, 4, 3);
    const FeasibleSet set(L, RVector::Constant(2, 1.0));
    for (int i = 0; i < 200; ++i)
    {
        const CVector a = instances::random_design(rng, L, 1.0).stack();
        const CVector b = instances::random_design(rng, L, 1.0).stack();
        CHECK(set.contains(smooth_update(a, b, instances::uniform(rng, 0.0, 1.0)), 1e-12));
    }
}

TEST_CASE("rounding examples")
{
    RMatrix one(3, 1);
    one << 0.9, 0.1, 0.0;
    CHECK(round_selection(one).matrix == (RMatrix(3, 1) << 1, 0, 0).finished());

    RMatrix clash(3, 2);
    clash << 0.8, 0.6, 0.1, 0.3, 0.1, 0.1;
    const RMatrix r = round_selection(clash).matrix;
    CHECK(r(0, 0) == 1.0);
    CHECK(r(1, 1) == 1.0);
    CHECK(r.sum() == 2.0);

    RMatrix binary = RMatrix::Zero(4, 2);
    binary(3, 0) = 1.0;
    binary(1, 1) = 1.0;
    CHECK(round_selection(binary).matrix == binary);
    CHECK_FALSE(round_selection(binary).relaxed);

    CHECK_THROWS(round_selection(RMatrix::Constant(2, 3, 0.5)));
    CHECK_THROWS(round_selection(RMatrix::Constant(3, 2, 1.5)));
}

TEST_CASE("rounding always yields a valid assignment")
{
    Rng rng(40);
    for (int i = 0; i < 2000; ++i)
    {
        const int S = 1 + i % 5, N = S + (i / 5) % 4;
        RMatrix c(N, S);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < S; ++b)
                c(a, b) = i % 3 == 0 ? std::round(instances::uniform(rng, 0.0, 1.0) * 4.0) / 4.0
                                     : instances::uniform(rng, 0.0, 1.0);
        CHECK(is_valid_binary_selection(round_selection(c).matrix));
    }
}
