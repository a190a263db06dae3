#include "flowgate/flowpred.hpp"

#include <cmath>
#include <deque>
#include <sstream>

#include "flowgate/core/ops.hpp"
#include "flowgate/losses.hpp"
#include "flowgate/simd/kernels.hpp"

namespace flowgate {

void FlowSolverConfig::validate() const
{
    if (alpha != 0.0)
        throw InvalidArgument("FlowSolverConfig: the solver has no SSIM gradient; alpha must be 0");
    if (!(lambda_smt >= 0.0) || !std::isfinite(lambda_smt))
        throw InvalidArgument("FlowSolverConfig: lambda_smt must be non-negative");
    if (min_side < 4)
        throw InvalidArgument("FlowSolverConfig: min_side must be at least 4");
    if (iterations < 1)
        throw InvalidArgument("FlowSolverConfig: iterations must be at least 1");
    if (!(step > 0.0) || !(charbonnier_eps > 0.0) || !(tolerance >= 0.0))
        throw InvalidArgument("FlowSolverConfig: step and eps must be positive, tolerance non-negative");
}

namespace {

struct Objective {
    const Image& src;
    const Image& dst;
    const FlowSolverConfig& cfg;
    std::vector<double> edge_w; // smoothness_edge_weights(dst)
    std::vector<double> gs;

    double operator()(const FlowField& f, std::vector<double>& grad)
    {
        double j = charbonnier_photometric(src, dst, f, cfg.charbonnier_eps, &grad);
        if (cfg.lambda_smt > 0.0) {
            j += cfg.lambda_smt * charbonnier_smoothness_weighted(f, edge_w, cfg.charbonnier_eps, &gs);
            for (std::size_t i = 0; i < grad.size(); ++i)
                grad[i] += cfg.lambda_smt * gs[i];
        }
        return j;
    }
};

[[noreturn]] void non_finite(const LevelTrace& t, int iter)
{
    std::ostringstream os;
    os << "estimate_flow: non-finite objective at level " << t.width << "x" << t.height << ", iteration " << iter;
    if (!t.objective.empty())
        os << ", last finite value " << t.objective.back();
    throw SolverError(os.str());
}

// Lagged-diffusivity direction: freeze the Charbonnier weights and the
// linearized warp at f, then relax the resulting quadratic for the increment
// with Gauss-Seidel sweeps. Returns the increment, interleaved (du, dv).
std::vector<double> irls_direction(const Image& src, const Image& dst, const FlowField& f,
                                   const FlowSolverConfig& cfg, const std::vector<double>& edge_w)
{
    const int h = f.height(), w = f.width();
    const std::size_t n = f.pixel_count();
    const double eps2 = cfg.charbonnier_eps * cfg.charbonnier_eps;
    std::vector<double> val(n), ix(n), iy(n);
    simd::active().warp_bilinear_grad(src.data().data(), h, w, f.data().data(), val.data(), ix.data(), iy.data());

    std::vector<double> r(n), psi(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = val[i] - dst.data()[i];
        psi[i] = 1.0 / std::sqrt(r[i] * r[i] + eps2);
    }
    // Edge weights a[k][i]: k = 0 horizontal edge (i, i+1), k = 1 vertical edge (i, i+w);
    // separate for the u and v components.
    std::vector<double> au[2], av[2];
    const auto fd = f.data();
    for (int k = 0; k < 2; ++k) {
        au[k].assign(n, 0.0);
        av[k].assign(n, 0.0);
    }
    if (cfg.lambda_smt > 0.0)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                for (int k = 0; k < 2; ++k) {
                    if ((k == 0 && x + 1 >= w) || (k == 1 && y + 1 >= h))
                        continue;
                    const std::size_t j = k == 0 ? i + 1 : i + w;
                    const double wg = edge_w[2 * i + k];
                    const double du = fd[2 * j] - fd[2 * i], dv = fd[2 * j + 1] - fd[2 * i + 1];
                    au[k][i] = cfg.lambda_smt * wg / std::sqrt(du * du + eps2);
                    av[k][i] = cfg.lambda_smt * wg / std::sqrt(dv * dv + eps2);
                }
            }

    std::vector<double> d(2 * n, 0.0);
    constexpr int kSweeps = 10;
    constexpr double kOmega = 1.9; // over-relaxation; plain Gauss-Seidel stalls on stiff weights
    for (int sweep = 0; sweep < kSweeps; ++sweep)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                double su = 0.0, sv = 0.0, wu = 0.0, wv = 0.0;
                auto nb = [&](std::size_t j, double a_u, double a_v) {
                    // Neighbour's current total minus own current value.
                    su += a_u * (fd[2 * j] + d[2 * j] - fd[2 * i]);
                    sv += a_v * (fd[2 * j + 1] + d[2 * j + 1] - fd[2 * i + 1]);
                    wu += a_u;
                    wv += a_v;
                };
                if (x + 1 < w)
                    nb(i + 1, au[0][i], av[0][i]);
                if (x > 0)
                    nb(i - 1, au[0][i - 1], av[0][i - 1]);
                if (y + 1 < h)
                    nb(i + w, au[1][i], av[1][i]);
                if (y > 0)
                    nb(i - w, au[1][i - w], av[1][i - w]);
                const double a11 = psi[i] * ix[i] * ix[i] + wu;
                const double a22 = psi[i] * iy[i] * iy[i] + wv;
                const double a12 = psi[i] * ix[i] * iy[i];
                const double b1 = -psi[i] * ix[i] * r[i] + su;
                const double b2 = -psi[i] * iy[i] * r[i] + sv;
                const double det = a11 * a22 - a12 * a12;
                double nu, nv;
                if (det > 1e-12 * (a11 * a22 + 1e-300)) {
                    nu = (a22 * b1 - a12 * b2) / det;
                    nv = (a11 * b2 - a12 * b1) / det;
                } else {
                    nu = a11 > 0.0 ? (b1 - a12 * d[2 * i + 1]) / a11 : 0.0;
                    nv = a22 > 0.0 ? (b2 - a12 * d[2 * i]) / a22 : 0.0;
                }
                d[2 * i] += kOmega * (nu - d[2 * i]);
                d[2 * i + 1] += kOmega * (nv - d[2 * i + 1]);
            }

    // The linearization is only trusted locally.
    double mx = 0.0;
    for (double v : d)
        mx = std::max(mx, std::fabs(v));
    if (mx > 1.0)
        for (double& v : d)
            v /= mx;
    return d;
}

// Backtracking line search along `dir` from `f`. Accepts the first step that
// strictly lowers the objective.
bool line_search(Objective& obj, const FlowField& f, const std::vector<double>& dir, double tau, double J,
                 FlowField& trial, double& Jt, std::vector<double>& gt, LevelTrace& trace, int it)
{
    const double tau_min = tau * 1e-4;
    for (; tau >= tau_min; tau *= 0.5) {
        auto fd = f.data();
        auto td = trial.data();
        for (std::size_t i = 0; i < fd.size(); ++i)
            td[i] = fd[i] + tau * dir[i];
        Jt = obj(trial, gt);
        if (!std::isfinite(Jt))
            non_finite(trace, it);
        if (Jt < J)
            return true;
        ++trace.rejected;
    }
    return false;
}

void solve_level(const Image& src, const Image& dst, FlowField& f, const FlowSolverConfig& cfg, LevelTrace& trace)
{
    Objective obj{src, dst, cfg, smoothness_edge_weights(dst), {}};
    std::vector<double> g, gt;
    double J = obj(f, g);
    if (!std::isfinite(J))
        non_finite(trace, 0);
    trace.objective.push_back(J);

    const double n = static_cast<double>(f.pixel_count());
    FlowField trial = f;
    std::vector<double> dir;
    for (int it = 1; it <= cfg.iterations; ++it) {
        double Jt = J;
        dir = irls_direction(src, dst, f, cfg, obj.edge_w);
        bool ok = line_search(obj, f, dir, 1.0, J, trial, Jt, gt, trace, it);
        if (!ok) {
            // Plain steepest descent; the objective is a per-pixel mean, so
            // scaling by N gives steps measured per pixel.
            for (std::size_t i = 0; i < dir.size(); ++i)
                dir[i] = -n * g[i];
            ok = line_search(obj, f, dir, cfg.step, J, trial, Jt, gt, trace, it);
        }
        if (!ok)
            break;
        const double rel = (J - Jt) / std::max(J, 1e-300);
        std::swap(f, trial);
        std::swap(g, gt);
        J = Jt;
        trace.objective.push_back(J);
        if (rel < cfg.tolerance)
            break;
    }
}

} // namespace

FlowEstimate estimate_flow_traced(const Frame& src, const Frame& dst, const FlowSolverConfig& cfg)
{
    cfg.validate();
    if (!src.same_shape(dst))
        detail::throw_shape_mismatch("estimate_flow");
    const Image gs = src.to_gray();
    const Image gd = dst.to_gray();
    const auto ps = build_pyramid(gs, cfg.min_side);
    const auto pd = build_pyramid(gd, cfg.min_side);

    FlowEstimate est;
    FlowField f;
    for (int l = static_cast<int>(ps.size()) - 1; l >= 0; --l) {
        const Image& s = ps[l];
        const Image& d = pd[l];
        if (f.pixel_count() == 0)
            f = FlowField(s.height(), s.width(), FlowDirection::Backward);
        else
            f = resize_flow(f, s.height(), s.width());
        LevelTrace t;
        t.height = s.height();
        t.width = s.width();
        solve_level(s, d, f, cfg, t);
        est.levels.push_back(std::move(t));
    }
    est.flow = std::move(f);
    return est;
}

FlowField estimate_flow(const Frame& src, const Frame& dst, const FlowSolverConfig& cfg)
{
    return estimate_flow_traced(src, dst, cfg).flow;
}

FlowField backward_from_forward(const FlowField& fwd)
{
    fwd.require(FlowDirection::Forward, "backward_from_forward");
    const int h = fwd.height(), w = fwd.width();
    const std::size_t n = fwd.pixel_count();
    FlowField out(h, w, FlowDirection::Backward);
    std::vector<double> best_d(n, INFINITY), best_m(n, -1.0);
    std::vector<std::uint8_t> filled(n, 0);

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = fwd.u(y, x), v = fwd.v(y, x);
            const double sy = y + v, sx = x + u;
            if (!(sx > -1.0 && sx < w && sy > -1.0 && sy < h))
                continue;
            const double fy = std::floor(sy), fx = std::floor(sx);
            const double ay = sy - fy, ax = sx - fx;
            const double mag = u * u + v * v;
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const double wgt = (dy ? ay : 1.0 - ay) * (dx ? ax : 1.0 - ax);
                    if (wgt <= 0.0)
                        continue;
                    const int ty = static_cast<int>(fy) + dy, tx = static_cast<int>(fx) + dx;
                    if (ty < 0 || ty >= h || tx < 0 || tx >= w)
                        continue;
                    const double d = (ty - sy) * (ty - sy) + (tx - sx) * (tx - sx);
                    const std::size_t i = static_cast<std::size_t>(ty) * w + tx;
                    if (d < best_d[i] || (d == best_d[i] && mag > best_m[i])) {
                        best_d[i] = d;
                        best_m[i] = mag;
                        out.set(ty, tx, {-u, -v});
                        filled[i] = 1;
                    }
                }
        }

    // Breadth-first fill, seeded in row-major order.
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i)
        if (filled[i])
            queue.push_back(i);
    while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        const int y = static_cast<int>(i / w), x = static_cast<int>(i % w);
        const FlowVec val = out.at(y, x);
        const int ny[4] = {y - 1, y, y, y + 1};
        const int nx[4] = {x, x - 1, x + 1, x};
        for (int k = 0; k < 4; ++k) {
            if (ny[k] < 0 || ny[k] >= h || nx[k] < 0 || nx[k] >= w)
                continue;
            const std::size_t j = static_cast<std::size_t>(ny[k]) * w + nx[k];
            if (filled[j])
                continue;
            filled[j] = 1;
            out.set(ny[k], nx[k], val);
            queue.push_back(j);
        }
    }
    return out;
}

FlowPair extrapolate_flow(const FlowField& prev, ExtrapolationMode mode)
{
    prev.require(FlowDirection::Forward, "extrapolate_flow");
    FlowPair p;
    if (mode == ExtrapolationMode::ZeroOrder) {
        p.forward = prev;
    } else {
        // f(q) = f_prev(q - f_prev(q)): resample the field along itself.
        FlowField back(prev.height(), prev.width(), FlowDirection::Backward);
        auto bd = back.data();
        auto pd = prev.data();
        for (std::size_t i = 0; i < bd.size(); ++i)
            bd[i] = -pd[i];
        p.forward = FlowField(prev.height(), prev.width(), FlowDirection::Forward);
        if (prev.pixel_count() > 0)
            simd::active().warp_bilinear(pd.data(), prev.height(), prev.width(), 2, bd.data(), BorderMode::Clamp,
                                         p.forward.data().data());
    }
    p.backward = backward_from_forward(p.forward);
    return p;
}

FlowPair VariationalExtrapolator::predict(const Clip& history) const
{
    const std::size_t n = history.frames.size();
    if (n < 2)
        throw InvalidArgument("predict_flows: need at least 2 history frames");
    // Estimated on the grid of frame n-2 toward frame n-1, i.e. the forward flow n-2 -> n-1.
    const FlowField f = estimate_flow(history.frames[n - 1], history.frames[n - 2], cfg_);
    return extrapolate_flow(f.retagged(FlowDirection::Forward), mode_);
}

FlowPair GroundTruthOracle::predict(const Clip& history) const
{
    const std::size_t n = history.frames.size();
    if (n < 1 || history.gt_forward.size() < n || history.gt_backward.size() < n)
        throw InvalidArgument("oracle predictor: clip has no ground truth for the requested step");
    return {history.gt_forward[n - 1], history.gt_backward[n - 1]};
}

FlowPair ZeroFlow::predict(const Clip& history) const
{
    const int h = history.height(), w = history.width();
    return {FlowField(h, w, FlowDirection::Forward), FlowField(h, w, FlowDirection::Backward)};
}

FlowPair predict_flows(const Clip& clip, const FlowPredictor& predictor)
{
    if (clip.frames.size() < 2)
        throw InvalidArgument("predict_flows: need at least 2 history frames");
    clip.validate();
    return predictor.predict(clip);
}

} // namespace flowgate
