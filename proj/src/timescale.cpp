#include "qcalc/timescale.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>

#include "qcalc/errors.hpp"
#include "qcalc/quantum.hpp"

namespace qcalc::timescale {

using numerics::close_to;
using quantum::fn_of_t;

namespace {

constexpr long long kMaxLatticePoints = 1000000;

double piece_min(const TimeScale::Piece& p) { return p.lo; }
double piece_max(const TimeScale::Piece& p) { return p.hi; }

// Index n >= 0 with q^n c matching t, or nullopt.
std::optional<long long> qlattice_index(double q, double c, double t) {
    if (!(t > 0.0)) return std::nullopt;
    double est = std::log(t / c) / std::log(q);
    long long n = std::llround(est);
    for (long long k = std::max<long long>(0, n - 1); k <= n + 1; ++k) {
        if (k > kMaxLatticePoints) break;
        if (close_to(t, std::pow(q, static_cast<double>(k)) * c)) return k;
    }
    return std::nullopt;
}

std::vector<TimeScale::Piece> normalize(std::vector<TimeScale::Piece> pieces) {
    if (pieces.empty()) throw std::invalid_argument("time scale must be nonempty");
    std::sort(pieces.begin(), pieces.end(),
              [](const auto& a, const auto& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });

    std::vector<TimeScale::Piece> out;
    for (const auto& p : pieces) {
        if (out.empty()) {
            out.push_back(p);
            continue;
        }
        auto& back = out.back();
        bool touches = p.lo <= back.hi || close_to(p.lo, back.hi);
        if (!touches) {
            out.push_back(p);
            continue;
        }
        using Kind = TimeScale::Piece::Kind;
        if (back.kind == Kind::qlattice || p.kind == Kind::qlattice) {
            // A point that is already a lattice member is absorbed; any other
            // overlap with a lattice piece is rejected.
            const auto& ql = back.kind == Kind::qlattice ? back : p;
            const auto& other = back.kind == Kind::qlattice ? p : back;
            if (other.kind == Kind::point &&
                (close_to(other.lo, 0.0) || qlattice_index(ql.q, ql.hi, other.lo)))
                back = ql;
            else
                throw std::invalid_argument("time scale pieces overlap a q-lattice");
            continue;
        }
        if (back.kind == Kind::point && p.kind == Kind::point) {
            if (close_to(p.lo, back.lo)) continue;  // duplicate point
            out.push_back(p);
            continue;
        }
        // interval-interval or interval-point overlap: merge spans.
        back.kind = Kind::interval;
        back.lo = std::min(back.lo, p.lo);
        back.hi = std::max(back.hi, p.hi);
    }
    return out;
}

}  // namespace

TimeScale TimeScale::interval(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("interval needs lo < hi");
    TimeScale t;
    t.pieces_.push_back({Piece::Kind::interval, lo, hi});
    return t;
}

TimeScale TimeScale::points(std::vector<double> pts) {
    if (pts.empty()) throw std::invalid_argument("points needs at least one value");
    std::vector<Piece> pieces;
    for (double p : pts) pieces.push_back({Piece::Kind::point, p, p});
    TimeScale t;
    t.pieces_ = normalize(std::move(pieces));
    return t;
}

TimeScale TimeScale::h_lattice(double h, double lo, double hi) {
    if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
    if (!(lo <= hi)) throw std::invalid_argument("need lo <= hi");
    long long k0 = static_cast<long long>(std::ceil(lo / h - 1e-9));
    long long k1 = static_cast<long long>(std::floor(hi / h + 1e-9));
    if (k1 - k0 + 1 > kMaxLatticePoints) throw std::invalid_argument("lattice too large");
    std::vector<double> pts;
    for (long long k = k0; k <= k1; ++k) pts.push_back(static_cast<double>(k) * h);
    return points(std::move(pts));
}

TimeScale TimeScale::q_lattice(double q, double c, double lo, double hi) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
    if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
    if (!(lo <= hi) || !(hi > 0.0)) throw std::invalid_argument("need lo <= hi with hi > 0");

    long long n0 = 0;
    if (c > hi && !close_to(c, hi)) {
        n0 = static_cast<long long>(std::ceil(std::log(hi / c) / std::log(q) - 1e-9));
        while (std::pow(q, static_cast<double>(n0)) * c > hi &&
               !close_to(std::pow(q, static_cast<double>(n0)) * c, hi))
            ++n0;
        if (n0 > kMaxLatticePoints) throw std::invalid_argument("lattice too large");
    }
    double top = std::pow(q, static_cast<double>(n0)) * c;

    if (lo > 0.0 && !close_to(lo, 0.0)) {
        std::vector<double> pts;
        for (long long n = n0;; ++n) {
            double v = std::pow(q, static_cast<double>(n)) * c;
            if (v < lo && !close_to(v, lo)) break;
            pts.push_back(v);
            if (n - n0 > kMaxLatticePoints) throw std::invalid_argument("lattice too large");
        }
        if (pts.empty()) throw std::invalid_argument("empty time scale");
        return points(std::move(pts));
    }

    TimeScale t;
    t.pieces_.push_back({Piece::Kind::qlattice, 0.0, top, q});
    return t;
}

TimeScale TimeScale::union_of(const std::vector<TimeScale>& parts) {
    std::vector<Piece> pieces;
    for (const auto& part : parts)
        pieces.insert(pieces.end(), part.pieces_.begin(), part.pieces_.end());
    TimeScale t;
    t.pieces_ = normalize(std::move(pieces));
    return t;
}

namespace {

// Piece index whose span could contain t, searching by lo.
int candidate_piece(const std::vector<TimeScale::Piece>& pieces, double t) {
    int lo = 0, hi = static_cast<int>(pieces.size()) - 1, best = 0;
    while (lo <= hi) {
        int mid = (lo + hi) / 2;
        if (pieces[mid].lo <= t || close_to(t, pieces[mid].lo)) {
            best = mid;
            lo = mid + 1;
        } else {
            hi = mid - 1;
        }
    }
    return best;
}

struct Located {
    int piece;
    double value;  // snapped coordinate
};

std::optional<Located> locate(const std::vector<TimeScale::Piece>& pieces, double t) {
    using Kind = TimeScale::Piece::Kind;
    int idx = candidate_piece(pieces, t);
    for (int i = std::max(0, idx - 1); i <= std::min<int>(idx + 1, pieces.size() - 1); ++i) {
        const auto& p = pieces[i];
        switch (p.kind) {
            case Kind::interval:
                if (close_to(t, p.lo)) return Located{i, p.lo};
                if (close_to(t, p.hi)) return Located{i, p.hi};
                if (t > p.lo && t < p.hi) return Located{i, t};
                break;
            case Kind::point:
                if (close_to(t, p.lo)) return Located{i, p.lo};
                break;
            case Kind::qlattice:
                if (close_to(t, 0.0)) return Located{i, 0.0};
                if (auto n = qlattice_index(p.q, p.hi, t))
                    return Located{i, std::pow(p.q, static_cast<double>(*n)) * p.hi};
                break;
        }
    }
    return std::nullopt;
}

}  // namespace

bool TimeScale::contains(double t) const { return locate(pieces_, t).has_value(); }

double TimeScale::snap(double t) const {
    auto loc = locate(pieces_, t);
    if (!loc) throw domain_error("point is not in the time scale");
    return loc->value;
}

JumpInfo TimeScale::jump(double t) const {
    auto loc = locate(pieces_, t);
    if (!loc) throw domain_error("point is not in the time scale");
    const Piece& p = pieces_[loc->piece];
    double v = loc->value;
    bool has_next = loc->piece + 1 < static_cast<int>(pieces_.size());
    bool has_prev = loc->piece > 0;
    double next_min = has_next ? piece_min(pieces_[loc->piece + 1]) : v;
    double prev_max = has_prev ? piece_max(pieces_[loc->piece - 1]) : v;

    double sigma = v, rho = v;
    switch (p.kind) {
        case Piece::Kind::interval:
            sigma = v < p.hi ? v : next_min;
            rho = v > p.lo ? v : prev_max;
            break;
        case Piece::Kind::point:
            sigma = next_min;
            rho = prev_max;
            break;
        case Piece::Kind::qlattice: {
            if (v == 0.0) {
                sigma = 0.0;  // accumulation point: right-dense
                rho = prev_max;
            } else {
                long long n = *qlattice_index(p.q, p.hi, v);
                sigma = n >= 1 ? std::pow(p.q, static_cast<double>(n - 1)) * p.hi : next_min;
                rho = std::pow(p.q, static_cast<double>(n + 1)) * p.hi;
            }
            break;
        }
    }

    JumpInfo info{};
    info.sigma = sigma;
    info.rho = rho;
    info.mu = sigma - v;
    info.nu = v - rho;
    if (info.mu > 0.0 && info.nu > 0.0) info.classification = PointClass::isolated;
    else if (info.mu > 0.0) info.classification = PointClass::right_scattered_left_dense;
    else if (info.nu > 0.0) info.classification = PointClass::left_scattered_right_dense;
    else info.classification = PointClass::dense;
    return info;
}

GammaWeights gamma_weights(const TimeScale& T, double t) {
    JumpInfo j = T.jump(t);
    double span = j.mu + j.nu;
    if (span == 0.0) return {0.5, 0.5};
    return {j.mu / span, j.nu / span};
}

namespace {

// One-sided difference with one Richardson step (error O(h^2)).
double one_sided_slope(const real_fn& f, double t, double h) {
    double s = t + h;  // h may be negative; divide by the gap as stored
    return (f(s) - f(t)) / (s - t);
}

double forward_richardson(const real_fn& f, double t, double h) {
    return 2.0 * one_sided_slope(f, t, h / 2.0) - one_sided_slope(f, t, h);
}

double backward_richardson(const real_fn& f, double t, double h) {
    return 2.0 * one_sided_slope(f, t, -h / 2.0) - one_sided_slope(f, t, -h);
}

// Derivative at a right- (or left-) dense point: central where the containing
// interval leaves room on both sides, otherwise one-sided staying inside it.
double dense_derivative(const TimeScale& T, const real_fn& f, double t) {
    double h = std::max(1e-4, 1e-4 * std::fabs(t));  // matches central_derivative's step
    for (const auto& p : T.pieces()) {
        if (p.kind != TimeScale::Piece::Kind::interval) continue;
        if (t < p.lo || t > p.hi) continue;
        double room_fwd = p.hi - t;
        double room_bwd = t - p.lo;
        if (room_fwd >= 2.0 * h && room_bwd >= 2.0 * h) return numerics::central_derivative(f, t);
        if (room_fwd >= room_bwd) return forward_richardson(f, t, std::min(h, room_fwd / 2.0));
        return backward_richardson(f, t, std::min(h, room_bwd / 2.0));
    }
    // Dense through accumulation (q-lattice zero): no interval to stay inside,
    // so step toward where the scale has points; f extends smoothly off-scale.
    if (t == T.min()) return forward_richardson(f, t, h);
    if (t == T.max()) return backward_richardson(f, t, h);
    return numerics::central_derivative(f, t);
}

}  // namespace

double delta_derivative(const TimeScale& T, const real_fn& f, double t) {
    double v = T.snap(t);
    JumpInfo j = T.jump(v);
    if (j.mu > 0.0) return (f(j.sigma) - f(v)) / j.mu;
    if (v == T.max() && j.nu > 0.0)
        throw domain_error("delta derivative excludes a left-scattered maximum");
    return dense_derivative(T, f, v);
}

double delta_derivative(const TimeScale& T, const expr::ExprFunc& f, double t) {
    return delta_derivative(T, fn_of_t(f), t);
}

double nabla_derivative(const TimeScale& T, const real_fn& f, double t) {
    double v = T.snap(t);
    JumpInfo j = T.jump(v);
    if (j.nu > 0.0) return (f(v) - f(j.rho)) / j.nu;
    if (v == T.min() && j.mu > 0.0)
        throw domain_error("nabla derivative excludes a right-scattered minimum");
    return dense_derivative(T, f, v);
}

double nabla_derivative(const TimeScale& T, const expr::ExprFunc& f, double t) {
    return nabla_derivative(T, fn_of_t(f), t);
}

double sym_diamond_derivative(const TimeScale& T, const real_fn& f, double t) {
    double v = T.snap(t);
    JumpInfo j = T.jump(v);
    if (v == T.max() && j.nu > 0.0)
        throw domain_error("symmetric derivative excludes a left-scattered maximum");
    if (v == T.min() && j.mu > 0.0)
        throw domain_error("symmetric derivative excludes a right-scattered minimum");
    if (j.classification != PointClass::dense) return (f(j.sigma) - f(j.rho)) / (j.sigma - j.rho);
    return dense_derivative(T, f, v);
}

double sym_diamond_derivative(const TimeScale& T, const expr::ExprFunc& f, double t) {
    return sym_diamond_derivative(T, fn_of_t(f), t);
}

double diamond_alpha_derivative(const TimeScale& T, const real_fn& f, double t, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (alpha == 1.0) return delta_derivative(T, f, t);
    if (alpha == 0.0) return nabla_derivative(T, f, t);
    return alpha * delta_derivative(T, f, t) + (1.0 - alpha) * nabla_derivative(T, f, t);
}

double diamond_alpha_derivative(const TimeScale& T, const expr::ExprFunc& f, double t,
                                double alpha) {
    return diamond_alpha_derivative(T, fn_of_t(f), t, alpha);
}

namespace {

// Adaptive Simpson with the standard |S2 - S1|/15 acceptance test.
double simpson_recurse(const real_fn& f, double a, double b, double fa, double fm, double fb,
                       double whole, double eps, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    if (depth >= 40) throw non_convergent("quadrature failed to settle within depth 40");
    return simpson_recurse(f, a, m, fa, flm, fm, left, eps / 2.0, depth + 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, eps / 2.0, depth + 1);
}

double simpson(const real_fn& f, double a, double b) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double v = simpson_recurse(f, a, b, fa, fm, fb, whole, 1e-10, 0);
    if (!std::isfinite(v)) throw non_convergent("quadrature produced a non-finite value");
    return v;
}

struct Seg {
    enum class Kind { riemann, jump, qtail };
    Kind kind;
    double x = 0.0;  // riemann: left end; jump: lower point
    double y = 0.0;  // riemann: right end; jump: upper point; qtail: top point
    double q = 0.0;  // qtail
};

// Decompose [a, b] (a, b in the scale, a < b) into interval runs, scattered
// gaps, and q-lattice tails ending at the accumulation point 0.
std::vector<Seg> walk(const TimeScale& T, double a, double b) {
    using Kind = TimeScale::Piece::Kind;
    const auto& pieces = T.pieces();
    auto la = locate(pieces, a);
    auto lb = locate(pieces, b);
    if (!la || !lb) throw domain_error("integration endpoint is not in the time scale");

    std::vector<Seg> segs;
    for (int idx = la->piece; idx <= lb->piece; ++idx) {
        const auto& p = pieces[idx];
        double seg_lo = idx == la->piece ? la->value : piece_min(p);
        double seg_hi = idx == lb->piece ? lb->value : piece_max(p);
        switch (p.kind) {
            case Kind::interval:
                if (seg_hi > seg_lo) segs.push_back({Seg::Kind::riemann, seg_lo, seg_hi, 0.0});
                break;
            case Kind::point:
                break;
            case Kind::qlattice: {
                if (seg_hi <= 0.0) break;
                if (seg_lo == 0.0) {
                    segs.push_back({Seg::Kind::qtail, 0.0, seg_hi, p.q});
                } else {
                    long long n_hi = *qlattice_index(p.q, p.hi, seg_hi);
                    long long n_lo = *qlattice_index(p.q, p.hi, seg_lo);
                    if (n_lo - n_hi > kMaxLatticePoints)
                        throw non_convergent("q-lattice run too long");
                    for (long long n = n_lo - 1; n >= n_hi; --n)
                        segs.push_back({Seg::Kind::jump,
                                        std::pow(p.q, static_cast<double>(n + 1)) * p.hi,
                                        std::pow(p.q, static_cast<double>(n)) * p.hi, 0.0});
                }
                break;
            }
        }
        if (idx < lb->piece)
            segs.push_back({Seg::Kind::jump, piece_max(p), piece_min(pieces[idx + 1]), 0.0});
    }
    return segs;
}

double qtail_series(double q, double top, const std::function<double(double, double, double)>& term) {
    // term(gap, lower, upper) for consecutive lattice pairs descending to 0.
    numerics::SeriesResult s = numerics::sum_series(
        [&](int k) {
            double upper = std::pow(q, k) * top;
            double lower = q * upper;
            return term(upper - lower, lower, upper);
        },
        {});
    if (!s.converged) throw non_convergent("q-lattice tail did not converge");
    return s.value;
}

enum class Mode { delta, nabla, diamond };

double scale_integral(const TimeScale& T, const real_fn& f, double a, double b, Mode mode) {
    double sa = T.snap(a);
    double sb = T.snap(b);
    if (sa == sb) return 0.0;
    if (sa > sb) return -scale_integral(T, f, b, a, mode);

    double total = 0.0;
    for (const Seg& s : walk(T, sa, sb)) {
        switch (s.kind) {
            case Seg::Kind::riemann:
                total += simpson(f, s.x, s.y);
                break;
            case Seg::Kind::jump: {
                double gap = s.y - s.x;
                if (mode == Mode::delta) total += gap * f(s.x);
                else if (mode == Mode::nabla) total += gap * f(s.y);
                else {
                    GammaWeights gl = gamma_weights(T, s.x);
                    GammaWeights gu = gamma_weights(T, s.y);
                    total += gap * (gl.gamma1 * f(s.x) + gu.gamma2 * f(s.y));
                }
                break;
            }
            case Seg::Kind::qtail: {
                if (mode == Mode::delta) {
                    total += qtail_series(s.q, s.y, [&](double gap, double lo, double) {
                        return gap * f(lo);
                    });
                } else if (mode == Mode::nabla) {
                    total += qtail_series(s.q, s.y, [&](double gap, double, double hi) {
                        return gap * f(hi);
                    });
                } else {
                    // Interior lattice points have constant weights 1/(1+q) and
                    // q/(1+q); the top point's nabla weight is scale-global.
                    double g1 = 1.0 / (1.0 + s.q);
                    double g2 = s.q / (1.0 + s.q);
                    double top_g2 = gamma_weights(T, s.y).gamma2;
                    bool first = true;
                    total += qtail_series(s.q, s.y, [&](double gap, double lo, double hi) {
                        double v = gap * g1 * f(lo);
                        v += gap * (first ? top_g2 : g2) * f(hi);
                        first = false;
                        return v;
                    });
                }
                break;
            }
        }
    }
    return total;
}

}  // namespace

double delta_integral(const TimeScale& T, const real_fn& f, double a, double b) {
    return scale_integral(T, f, a, b, Mode::delta);
}

double delta_integral(const TimeScale& T, const expr::ExprFunc& f, double a, double b) {
    return delta_integral(T, fn_of_t(f), a, b);
}

double nabla_integral(const TimeScale& T, const real_fn& f, double a, double b) {
    return scale_integral(T, f, a, b, Mode::nabla);
}

double nabla_integral(const TimeScale& T, const expr::ExprFunc& f, double a, double b) {
    return nabla_integral(T, fn_of_t(f), a, b);
}

double diamond_alpha_integral(const TimeScale& T, const real_fn& f, double a, double b,
                              double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (alpha == 1.0) return delta_integral(T, f, a, b);
    if (alpha == 0.0) return nabla_integral(T, f, a, b);
    return alpha * delta_integral(T, f, a, b) + (1.0 - alpha) * nabla_integral(T, f, a, b);
}

double diamond_alpha_integral(const TimeScale& T, const expr::ExprFunc& f, double a, double b,
                              double alpha) {
    return diamond_alpha_integral(T, fn_of_t(f), a, b, alpha);
}

double diamond_integral(const TimeScale& T, const real_fn& f, double a, double b) {
    return scale_integral(T, f, a, b, Mode::diamond);
}

double diamond_integral(const TimeScale& T, const expr::ExprFunc& f, double a, double b) {
    return diamond_integral(T, fn_of_t(f), a, b);
}

std::vector<double> sample_points(const TimeScale& T, double a, double b, int per_piece) {
    if (a > b) std::swap(a, b);
    std::vector<double> pts;
    for (const auto& p : T.pieces()) {
        using Kind = TimeScale::Piece::Kind;
        double lo = std::max(p.lo, a);
        double hi = std::min(p.hi, b);
        if (lo > hi && !close_to(lo, hi)) continue;
        switch (p.kind) {
            case Kind::point:
                pts.push_back(p.lo);
                break;
            case Kind::interval:
                for (int i = 0; i <= per_piece; ++i)
                    pts.push_back(lo + (hi - lo) * static_cast<double>(i) / per_piece);
                break;
            case Kind::qlattice: {
                if (lo <= 0.0) pts.push_back(0.0);
                double v = p.hi;
                for (int i = 0; i < per_piece && v >= lo - 1e-15; ++i, v *= p.q)
                    if (v <= hi || close_to(v, hi)) pts.push_back(v);
                break;
            }
        }
    }
    return pts;
}

DiamondReport diamond_inequality_check(DiamondIneqKind kind, const real_fn& f, const real_fn& g,
                                       const TimeScale& T, double a, double b, double exponent) {
    double sa = T.snap(a);
    double sb = T.snap(b);
    if (!(sa <= sb)) throw std::invalid_argument("need a <= b");

    DiamondReport out{};
    if (kind == DiamondIneqKind::mvt) {
        std::vector<double> pts = sample_points(T, sa, sb);
        for (double t : pts)
            if (g(t) < -1e-12 * std::max(1.0, std::fabs(g(t))))
                throw domain_error("g must be nonnegative on the scale");
        out.lhs = diamond_integral(T, [&](double t) { return f(t) * g(t); }, sa, sb);
        out.rhs = diamond_integral(T, g, sa, sb);
        double m = std::numeric_limits<double>::infinity(), M = -m;
        for (double t : pts) {
            double v = f(t);
            m = std::min(m, v);
            M = std::max(M, v);
        }
        out.inf_f = m;
        out.sup_f = M;
        out.K = std::fabs(out.rhs) <= 1e-14 * std::max(1.0, std::fabs(out.lhs))
                    ? 0.0
                    : out.lhs / out.rhs;
        double tol = 1e-9 * std::max({1.0, std::fabs(m), std::fabs(M)});
        out.holds = out.K >= m - tol && out.K <= M + tol;
        return out;
    }

    double ph = kind == DiamondIneqKind::cauchy_schwarz ? 2.0 : exponent;
    if (!(ph > 1.0)) throw std::invalid_argument("exponent must exceed 1");
    double qh = ph / (ph - 1.0);
    auto integral = [&](const real_fn& h) { return diamond_integral(T, h, sa, sb); };

    switch (kind) {
        case DiamondIneqKind::holder:
        case DiamondIneqKind::cauchy_schwarz: {
            out.lhs = integral([&](double t) { return std::fabs(f(t) * g(t)); });
            double nf = integral([&](double t) { return std::pow(std::fabs(f(t)), ph); });
            double ng = integral([&](double t) { return std::pow(std::fabs(g(t)), qh); });
            out.rhs = std::pow(nf, 1.0 / ph) * std::pow(ng, 1.0 / qh);
            break;
        }
        case DiamondIneqKind::minkowski: {
            double nfg = integral([&](double t) { return std::pow(std::fabs(f(t) + g(t)), ph); });
            double nf = integral([&](double t) { return std::pow(std::fabs(f(t)), ph); });
            double ng = integral([&](double t) { return std::pow(std::fabs(g(t)), ph); });
            out.lhs = std::pow(nfg, 1.0 / ph);
            out.rhs = std::pow(nf, 1.0 / ph) + std::pow(ng, 1.0 / ph);
            break;
        }
        case DiamondIneqKind::mvt:
            break;
    }
    out.holds = out.lhs <= out.rhs + 1e-9 * std::max(1.0, out.rhs);
    return out;
}

DiamondReport diamond_inequality_check(DiamondIneqKind kind, const expr::ExprFunc& f,
                                       const expr::ExprFunc& g, const TimeScale& T, double a,
                                       double b, double exponent) {
    return diamond_inequality_check(kind, fn_of_t(f), fn_of_t(g), T, a, b, exponent);
}

namespace {

struct ScaleCursor {
    const std::string& src;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }

    [[noreturn]] void fail(const std::string& what, const std::string& expected) {
        throw parse_error("time scale parse error at offset " + std::to_string(pos) + ": " + what,
                          pos, expected);
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'", std::string(1, c));
        ++pos;
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        if (pos == start) fail("expected a name", "identifier");
        return src.substr(start, pos - start);
    }

    double number() {
        skip_ws();
        const char* begin = src.c_str() + pos;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("expected a number", "number");
        pos += static_cast<std::size_t>(end - begin);
        return v;
    }
};

double named_or(const std::map<std::string, double>& named, const std::vector<double>& positional,
                const char* name, std::size_t index, ScaleCursor& cur) {
    if (auto it = named.find(name); it != named.end()) return it->second;
    if (index < positional.size()) return positional[index];
    cur.fail(std::string("missing argument '") + name + "'", name);
}

TimeScale parse_spec(ScaleCursor& cur) {
    std::string name = cur.ident();
    cur.expect('(');

    if (name == "union") {
        std::vector<TimeScale> parts;
        parts.push_back(parse_spec(cur));
        while (cur.peek() == ',') {
            ++cur.pos;
            parts.push_back(parse_spec(cur));
        }
        cur.expect(')');
        return TimeScale::union_of(parts);
    }

    std::map<std::string, double> named;
    std::vector<double> positional;
    if (cur.peek() != ')') {
        while (true) {
            cur.skip_ws();
            if (std::isalpha(static_cast<unsigned char>(cur.peek()))) {
                std::string key = cur.ident();
                cur.expect('=');
                named[key] = cur.number();
            } else {
                positional.push_back(cur.number());
            }
            if (cur.peek() != ',') break;
            ++cur.pos;
        }
    }
    cur.expect(')');

    if (name == "interval")
        return TimeScale::interval(named_or(named, positional, "lo", 0, cur),
                                   named_or(named, positional, "hi", 1, cur));
    if (name == "r")
        return TimeScale::reals(named_or(named, positional, "lo", 0, cur),
                                named_or(named, positional, "hi", 1, cur));
    if (name == "points") {
        if (!named.empty()) cur.fail("points takes positional values", "numbers");
        return TimeScale::points(positional);
    }
    if (name == "hz")
        return TimeScale::h_lattice(named_or(named, positional, "h", 0, cur),
                                    named_or(named, positional, "lo", 1, cur),
                                    named_or(named, positional, "hi", 2, cur));
    if (name == "qlattice")
        return TimeScale::q_lattice(named_or(named, positional, "q", 0, cur),
                                    named_or(named, positional, "c", 1, cur),
                                    named_or(named, positional, "lo", 2, cur),
                                    named_or(named, positional, "hi", 3, cur));
    cur.fail("unknown scale constructor '" + name + "'",
             "union, interval, r, points, hz or qlattice");
}

}  // namespace

TimeScale parse_time_scale(const std::string& text) {
    ScaleCursor cur{text};
    TimeScale t = parse_spec(cur);
    cur.skip_ws();
    if (cur.pos != text.size()) cur.fail("unexpected trailing input", "end of input");
    return t;
}

}  // namespace qcalc::timescale
