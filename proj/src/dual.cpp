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

#include "qmimo/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace qmimo {

RVector FeasibleSet::free_mask() const
{
    RVector m = RVector::Ones(layout.size());
    if (freeze_selection)
        m.segment(layout.c_offset(), layout.codewords * layout.rf_chains).setZero();
    if (freeze_combiner)
        m.segment(layout.v_offset(), layout.rf_chains * layout.rf_chains).setZero();
    if (freeze_beamformers)
        m.segment(layout.w_offset(), layout.rf_chains * layout.users).setZero();
    return m;
}

bool FeasibleSet::contains(const CVector &x, double tol) const
{
    if (x.size() != layout.size())
        return false;
    const int K = layout.users, N = layout.codewords, S = layout.rf_chains;
    for (int k = 0; k < K; ++k)
    {
        const cplx p = x(layout.p_offset() + k);
        if (std::abs(p.imag()) > tol || p.real() < -tol || p.real() > p_max(k) + tol)
            return false;
    }
    RMatrix c(N, S);
    for (int s = 0; s < S; ++s)
        for (int n = 0; n < N; ++n)
        {
            const cplx v = x(layout.c_offset() + s * N + n);
            if (std::abs(v.imag()) > tol || v.real() < -tol || v.real() > 1.0 + tol)
                return false;
            c(n, s) = v.real();
        }
    if (((c.colwise().sum().array() - 1.0).abs() > tol).any())
        return false;
    if ((c.rowwise().sum().array() > 1.0 + tol).any())
        return false;
    return x.allFinite();
}

double closed_form_coordinate(double a, double b, double lo, double hi)
{
    if (!(a > 0.0))
        throw std::invalid_argument("closed_form_coordinate: curvature must be positive");
    return std::clamp(-b / (2.0 * a), lo, hi);
}

cplx closed_form_coordinate(double a, cplx b)
{
    if (!(a > 0.0))
        throw std::invalid_argument("closed_form_coordinate: curvature must be positive");
    return -std::conj(b) / (2.0 * a);
}

RVector project_simplex(const RVector &v)
{
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0)
            theta = t;
    }
    return (v.array() - theta).max(0.0).matrix();
}

namespace {

enum class Mode
{
    power,
    feasibility
};

struct Evaluation
{
    double a = 0.0;
    CVector y;
    CVector x;
    std::vector<char> unclamped;
    RVector grad;
    double phi = -std::numeric_limits<double>::infinity();
    bool valid = false;
};

class DualProblem
{
  public:
    DualProblem(const SurrogateSet &s, const FeasibleSet &set, Mode mode, OpCounter *ops)
        : s_(s), set_(set), mode_(mode), ops_(ops), L_(set.layout)
    {
        K_ = L_.users;
        N_ = L_.codewords;
        S_ = L_.rf_chains;
        n_ = L_.size();
        if (s.center.size() != n_ || s.slopes.rows() != n_ || s.slopes.cols() != K_ || s.curvature.size() != K_ ||
            s.offset.size() != K_)
            throw std::invalid_argument("dual solver: surrogate dimensions do not match the layout");
        if (set.p_max.size() != K_ || (set.p_max.array() < 0.0).any())
            throw std::invalid_argument("dual solver: invalid power limits");
        if ((s.curvature.array() <= 0.0).any())
            throw std::invalid_argument("dual solver: surrogate curvature must be positive");
        if (s.metric.size() != 0 && (s.metric.size() != n_ || (s.metric.array() <= 0.0).any()))
            throw std::invalid_argument("dual solver: proximal metric must be empty or positive of length n");
        metric_ = s.metric.size() ? s.metric : RVector::Ones(n_);
        selection_free_ = !set.freeze_selection;
        dim_ = K_ + (selection_free_ ? N_ + S_ : 0);
        free_ = set.free_mask();
    }

    int dim() const { return dim_; }
    int users() const { return K_; }
    bool bounded(int i) const { return i < K_ + (selection_free_ ? N_ : 0); }
    Mode mode() const { return mode_; }

    Evaluation evaluate(const RVector &theta) const
    {
        Evaluation e;
        const RVector lam = theta.head(K_);
        e.a = lam.dot(s_.curvature);
        if (ops_)
        {
            ++ops_->primal_evaluations;
            ops_->flops += 8.0 * n_ * K_ + 10.0 * n_;
        }
        if (!(e.a > 0.0) || !std::isfinite(e.a))
            return e;

        CVector m = s_.slopes * lam.cast<cplx>();
        if (mode_ == Mode::power)
            m.segment(L_.p_offset(), K_).array() += 1.0;
        if (selection_free_)
        {
            const auto mu = theta.segment(K_, N_);
            const auto de = theta.segment(K_ + N_, S_);
            for (int s = 0; s < S_; ++s)
                for (int n = 0; n < N_; ++n)
                    m(L_.c_offset() + s * N_ + n) += mu(n) + de(s);
        }
        e.y = s_.center - (m.array() / (2.0 * e.a * metric_.array())).matrix();
        e.x = e.y;
        e.unclamped.assign(n_, 1);
        for (int i = 0; i < n_; ++i)
        {
            if (free_(i) == 0.0)
            {
                e.x(i) = s_.center(i);
                e.unclamped[i] = 0;
                continue;
            }
            if (i >= L_.real_size())
                continue;
            const double hi = i < K_ ? set_.p_max(i) : 1.0;
            const double t = e.y(i).real();
            const double c = std::clamp(t, 0.0, hi);
            e.x(i) = c;
            e.unclamped[i] = (c == t) ? 1 : 0;
        }

        const RVector f = s_.values(e.x);
        e.grad.resize(dim_);
        e.grad.head(K_) = f;
        e.phi = lam.dot(f);
        if (mode_ == Mode::power)
            e.phi += e.x.segment(L_.p_offset(), K_).real().sum();
        if (selection_free_)
        {
            RMatrix c(N_, S_);
            for (int s = 0; s < S_; ++s)
                for (int n = 0; n < N_; ++n)
                    c(n, s) = e.x(L_.c_offset() + s * N_ + n).real();
            e.grad.segment(K_, N_) = c.rowwise().sum().array() - 1.0;
            e.grad.segment(K_ + N_, S_) = c.colwise().sum().transpose().array() - 1.0;
            e.phi += theta.segment(K_, N_ + S_).dot(e.grad.segment(K_, N_ + S_));
        }
        e.valid = std::isfinite(e.phi);
        return e;
    }

    // Q = -Hessian of the dual function at an evaluation (positive semidefinite).
    RMatrix curvature(const Evaluation &e) const
    {
        std::vector<int> idx;
        idx.reserve(n_);
        for (int i = 0; i < n_; ++i)
            if (e.unclamped[i])
                idx.push_back(i);
        const int r = static_cast<int>(idx.size());
        CMatrix psi = CMatrix::Zero(r, dim_);
        const CVector d = e.y - s_.center;
        for (int j = 0; j < r; ++j)
        {
            const int i = idx[j];
            for (int k = 0; k < K_; ++k)
                psi(j, k) = s_.slopes(i, k) + 2.0 * s_.curvature(k) * metric_(i) * d(i);
            if (i < L_.real_size())
                psi.row(j) = psi.row(j).real().cast<cplx>();
            if (selection_free_ && i >= L_.c_offset() && i < L_.v_offset())
            {
                const int off = i - L_.c_offset();
                psi(j, K_ + off % N_) = 1.0;
                psi(j, K_ + N_ + off / N_) = 1.0;
            }
            psi.row(j) /= std::sqrt(metric_(i));
        }
        if (ops_)
        {
            ++ops_->hessian_builds;
            ops_->flops += 8.0 * r * dim_ * dim_ / 2.0 + 8.0 * r * K_;
        }
        RMatrix q = (psi.adjoint() * psi).real() / (2.0 * e.a);
        return 0.5 * (q + q.transpose());
    }

    // Optimality measure: theta - Proj(theta + grad).
    double residual(const RVector &theta, const RVector &grad) const
    {
        RVector t = theta + grad;
        project(t);
        return (theta - t).lpNorm<Eigen::Infinity>();
    }

    void project(RVector &theta) const
    {
        if (mode_ == Mode::feasibility)
            theta.head(K_) = project_simplex(theta.head(K_));
        else
            theta.head(K_) = theta.head(K_).cwiseMax(0.0);
        if (selection_free_)
            theta.segment(K_, N_) = theta.segment(K_, N_).cwiseMax(0.0);
    }

    SubproblemSolution package(const RVector &theta, const Evaluation &e, int iters) const
    {
        SubproblemSolution out;
        out.x = e.x;
        out.dual.rate_multipliers = theta.head(K_);
        if (selection_free_)
        {
            out.dual.row_multipliers = theta.segment(K_, N_);
            out.dual.column_multipliers = theta.segment(K_ + N_, S_);
        }
        if (mode_ == Mode::power)
            out.objective = e.x.segment(L_.p_offset(), K_).real().sum();
        else
            out.objective = e.grad.head(K_).maxCoeff();
        out.dual_value = e.phi;
        out.iterations = iters;
        out.residual = residual(theta, e.grad);
        return out;
    }

    const SurrogateSet &surrogates() const { return s_; }
    const Layout &layout() const { return L_; }

  private:
    const SurrogateSet &s_;
    const FeasibleSet &set_;
    Mode mode_;
    OpCounter *ops_;
    Layout L_;
    int K_ = 0, N_ = 0, S_ = 0, n_ = 0, dim_ = 0;
    bool selection_free_ = true;
    RVector free_;
    RVector metric_;
};

// max g'd - 0.5 d'Qd  s.t.  d_i >= lb_i (finite entries), sum of d over `eq` = 0 when
// `eq` is non-empty. Primal active-set method started from the feasible point d = 0.
RVector bounded_newton_step(const RMatrix &Q, const RVector &g, const RVector &lb, const std::vector<int> &eq,
                            OpCounter *ops)
{
    const int n = static_cast<int>(g.size());
    RVector d = RVector::Zero(n);
    RVector e = RVector::Zero(n);
    for (int i : eq)
        e(i) = 1.0;
    const bool has_eq = !eq.empty();

    std::vector<char> active(n, 0);
    for (int i = 0; i < n; ++i)
        if (std::isfinite(lb(i)) && lb(i) >= 0.0 && g(i) <= 0.0)
            active[i] = 1;
    if (has_eq && std::all_of(eq.begin(), eq.end(), [&](int i) { return active[i]; }))
    {
        // keep the largest gradient component free so the equality stays solvable
        int best = eq.front();
        for (int i : eq)
            if (g(i) > g(best))
                best = i;
        active[best] = 0;
    }

    for (int iter = 0; iter < 4 * n + 20; ++iter)
    {
        std::vector<int> F;
        for (int i = 0; i < n; ++i)
            if (!active[i])
                F.push_back(i);
        const int nf = static_cast<int>(F.size());
        const bool use_eq = has_eq && std::any_of(F.begin(), F.end(), [&](int i) { return e(i) != 0.0; });
        const int m = nf + (use_eq ? 1 : 0);

        RVector target = d;
        double nu = 0.0;
        if (m > 0)
        {
            RMatrix A = RMatrix::Zero(m, m);
            RVector rhs(m);
            RVector dW = RVector::Zero(n);
            for (int i = 0; i < n; ++i)
                if (active[i])
                    dW(i) = d(i);
            const RVector qdw = Q * dW;
            for (int a = 0; a < nf; ++a)
            {
                for (int b = 0; b < nf; ++b)
                    A(a, b) = Q(F[a], F[b]);
                rhs(a) = g(F[a]) - qdw(F[a]);
            }
            if (use_eq)
            {
                for (int a = 0; a < nf; ++a)
                {
                    A(a, nf) = e(F[a]);
                    A(nf, a) = e(F[a]);
                }
                rhs(nf) = -e.dot(dW);
            }
            const RVector sol = A.fullPivLu().solve(rhs);
            if (ops)
            {
                ++ops->kkt_solves;
                ops->flops += 2.0 / 3.0 * m * m * m;
            }
            for (int a = 0; a < nf; ++a)
                target(F[a]) = sol(a);
            for (int i = 0; i < n; ++i)
                if (active[i])
                    target(i) = d(i);
            if (use_eq)
                nu = sol(nf);
        }

        // Step towards the equality-constrained optimum, stopping at the first bound.
        double t = 1.0;
        int blocking = -1;
        for (int i : F)
        {
            if (!std::isfinite(lb(i)))
                continue;
            if (target(i) < lb(i) && target(i) < d(i))
            {
                const double ti = (lb(i) - d(i)) / (target(i) - d(i));
                if (ti < t)
                {
                    t = ti;
                    blocking = i;
                }
            }
        }
        d += t * (target - d);
        if (blocking >= 0)
        {
            d(blocking) = lb(blocking);
            active[blocking] = 1;
            continue;
        }

        // Multipliers of the active bounds; for max g'd - 0.5 d'Qd they must be >= 0.
        const RVector grad = g - Q * d - nu * e;
        int release = -1;
        const double threshold = 1e-14 * (1.0 + g.lpNorm<Eigen::Infinity>());
        for (int i = 0; i < n; ++i)
            if (active[i] && grad(i) > threshold && (release < 0 || grad(i) > grad(release)))
                release = i;
        if (release < 0)
            return d;
        active[release] = 0;
    }
    return d;
}

SubproblemSolution solve_newton(const DualProblem &P, RVector theta, const DualOptions &opt, OpCounter *ops)
{
    const int dim = P.dim();
    const int K = P.users();
    std::vector<int> eq;
    if (P.mode() == Mode::feasibility)
        for (int k = 0; k < K; ++k)
            eq.push_back(k);

    Evaluation cur = P.evaluate(theta);
    if (!cur.valid)
        throw std::invalid_argument("dual solver: invalid starting multipliers");

    double reg_boost = 1.0;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter)
    {
        if (ops)
            ++ops->dual_iterations;
        const double res = P.residual(theta, cur.grad);
        if (res <= opt.tolerance)
            return P.package(theta, cur, iter);
        // Vanishing rate multipliers mean zero power is optimal but the primal point
        // is not determined by the multipliers; the caller resolves that case.
        if (P.mode() == Mode::power && theta.head(K).sum() < 1e-9)
            throw DualNonConvergence("dual solver: rate multipliers collapsed to zero", P.package(theta, cur, iter));

        RMatrix Q = P.curvature(cur);
        const double scale = std::max(Q.diagonal().maxCoeff(), 1e-300);
        const double eps = scale * (1e-13 + 1e-6 * std::min(1.0, res)) * reg_boost;
        Q.diagonal().array() += eps;

        RVector lb = RVector::Constant(dim, -std::numeric_limits<double>::infinity());
        for (int i = 0; i < dim; ++i)
            if (P.bounded(i))
                lb(i) = -theta(i);
        const RVector d = bounded_newton_step(Q, cur.grad, lb, eq, ops);
        const double slope = cur.grad.dot(d);

        bool accepted = false;
        if (slope > 0.0)
        {
            double t = 1.0;
            for (int bt = 0; bt < 40; ++bt, t *= 0.5)
            {
                RVector trial = theta + t * d;
                for (int i = 0; i < dim; ++i)
                    if (P.bounded(i) && trial(i) < 0.0)
                        trial(i) = 0.0;
                if (P.mode() == Mode::feasibility)
                    trial.head(K) /= trial.head(K).sum();
                Evaluation ev = P.evaluate(trial);
                if (!ev.valid)
                    continue;
                // Near the optimum the dual gain drops below the resolution of phi;
                // a step that keeps phi within rounding and shrinks the residual is
                // then accepted as well.
                // A step that changes nothing is not progress even though it
                // passes the sufficient-increase test with equality.
                const double trial_res = P.residual(trial, ev.grad);
                const bool ascent = ev.phi >= cur.phi + 1e-4 * t * slope && (ev.phi > cur.phi || trial_res < res);
                const bool flat = ev.phi >= cur.phi - 64.0 * std::numeric_limits<double>::epsilon() *
                                                          (1.0 + std::abs(cur.phi)) &&
                                  trial_res <= 0.5 * res;
                if (ascent || flat)
                {
                    theta = trial;
                    cur = std::move(ev);
                    accepted = true;
                    break;
                }
            }
        }
        if (accepted)
        {
            reg_boost = std::max(1.0, reg_boost * 0.1);
            continue;
        }
        // No ascent possible at working precision: accept when close enough,
        // otherwise regularise harder and retry.
        if (res <= 1e3 * opt.tolerance)
            return P.package(theta, cur, iter);
        reg_boost *= 1e3;
        if (reg_boost > 1e18)
            break;
    }
    throw DualNonConvergence("dual solver: Newton iterations did not reach the tolerance",
                             P.package(theta, cur, iter));
}

SubproblemSolution solve_subgradient(const DualProblem &P, RVector theta, const DualOptions &opt, OpCounter *ops)
{
    Evaluation cur = P.evaluate(theta);
    if (!cur.valid)
        throw std::invalid_argument("dual solver: invalid starting multipliers");
    RVector best_theta = theta;
    Evaluation best = cur;
    const double step0 = 1.0 / std::max(1.0, cur.grad.lpNorm<Eigen::Infinity>());
    for (int t = 1; t <= opt.max_subgradient_iterations; ++t)
    {
        if (ops)
            ++ops->dual_iterations;
        if (P.residual(theta, cur.grad) <= opt.subgradient_tolerance)
            return P.package(theta, cur, t);
        RVector next = theta + (step0 / std::sqrt(static_cast<double>(t))) * cur.grad;
        P.project(next);
        Evaluation ev = P.evaluate(next);
        if (!ev.valid)
            break;
        theta = next;
        cur = std::move(ev);
        if (cur.phi > best.phi)
        {
            best = cur;
            best_theta = theta;
        }
    }
    throw DualNonConvergence("dual solver: subgradient iterations did not reach the tolerance",
                             P.package(best_theta, best, opt.max_subgradient_iterations));
}

RVector initial_multipliers(const DualProblem &P, const DualState *warm, int N, int S)
{
    const int K = P.users();
    RVector theta = RVector::Zero(P.dim());
    theta.head(K).setConstant(1.0 / K);
    if (warm && warm->rate_multipliers.size() == K && warm->rate_multipliers.allFinite() &&
        (warm->rate_multipliers.array() >= 0.0).all() && warm->rate_multipliers.sum() > 0.0)
    {
        theta.head(K) = warm->rate_multipliers;
        if (P.dim() > K && warm->row_multipliers.size() == N && warm->column_multipliers.size() == S)
        {
            theta.segment(K, N) = warm->row_multipliers.cwiseMax(0.0);
            theta.segment(K + N, S) = warm->column_multipliers;
        }
    }
    if (P.mode() == Mode::feasibility)
        theta.head(K) = project_simplex(theta.head(K));
    if (theta.head(K).sum() <= 0.0)
        theta.head(K).setConstant(1.0 / K);
    return theta;
}

SubproblemSolution run(const DualProblem &P, const DualOptions &opt, const DualState *warm, OpCounter *ops)
{
    const Layout &L = P.layout();
    RVector theta = initial_multipliers(P, warm, L.codewords, L.rf_chains);
    if (opt.method == DualMethod::newton)
    {
        if (warm)
        {
            try
            {
                return solve_newton(P, theta, opt, ops);
            }
            catch (const DualNonConvergence &)
            {
                // A stale warm start can sit in a poorly conditioned region; retry cold.
                theta = initial_multipliers(P, nullptr, L.codewords, L.rf_chains);
            }
        }
        try
        {
            return solve_newton(P, theta, opt, ops);
        }
        catch (const DualNonConvergence &e)
        {
            const SubproblemSolution &best = e.best();
            if (P.mode() == Mode::power && best.dual.rate_multipliers.sum() < 1e-9)
                throw;
            if (best.residual <= opt.fallback_tolerance)
                return best;
            theta = initial_multipliers(P, &best.dual, L.codewords, L.rf_chains);
        }
    }
    return solve_subgradient(P, theta, opt, ops);
}

} // namespace

SubproblemSolution solve_subproblem(const SurrogateSet &surrogates, const FeasibleSet &set, const DualOptions &options,
                                    const DualState *warm, OpCounter *ops)
{
    DualProblem P(surrogates, set, Mode::power, ops);

    // Zero multipliers are optimal when zero power already satisfies every surrogate.
    CVector x0 = surrogates.center;
    x0.segment(set.layout.p_offset(), set.layout.users).setZero();
    if ((surrogates.values(x0).array() <= 0.0).all())
    {
        SubproblemSolution out;
        out.x = x0;
        out.dual.rate_multipliers = RVector::Zero(set.layout.users);
        if (!set.freeze_selection)
        {
            out.dual.row_multipliers = RVector::Zero(set.layout.codewords);
            out.dual.column_multipliers = RVector::Zero(set.layout.rf_chains);
        }
        return out;
    }
    try
    {
        return run(P, options, warm, ops);
    }
    catch (const DualNonConvergence &e)
    {
        if (e.best().dual.rate_multipliers.sum() > 1e-6)
            throw;
        // Zero total power is attainable with some other (c, v, w): pick the
        // minimax point among the zero-power designs.
        FeasibleSet zero = set;
        zero.p_max.setZero();
        SubproblemSolution alt = solve_feasibility(surrogates, zero, options, nullptr, ops);
        if (alt.objective > 0.0)
            throw;
        alt.objective = 0.0;
        alt.dual.rate_multipliers.setZero();
        return alt;
    }
}

SubproblemSolution solve_feasibility(const SurrogateSet &surrogates, const FeasibleSet &set,
                                     const DualOptions &options, const DualState *warm, OpCounter *ops)
{
    DualProblem P(surrogates, set, Mode::feasibility, ops);
    return run(P, options, warm, ops);
}

} // namespace qmimo
