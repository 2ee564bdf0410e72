#include "qci/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace qci {

namespace {

double checked_eval(const RealFn& fn, double t, const char* what) {
    const double v = fn(t);
    if (!std::isfinite(v)) {
        throw EvaluationError(std::string("profile ") + what + " non-finite at t = " + fmt_g17(t));
    }
    return v;
}

// Bisection for a root of g inside a sign-change bracket.
double bisect(const RealFn& g, double a, double b, double tol) {
    double ga = g(a), gb = g(b);
    if (ga == 0.0) return a;
    if (gb == 0.0) return b;
    if ((ga > 0.0) == (gb > 0.0)) throw BracketError("bisect: endpoints do not bracket a sign change");
    for (int i = 0; i < 200 && (b - a) > tol; ++i) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if (gm == 0.0) return m;
        if ((gm > 0.0) == (ga > 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << (pass ? "pass" : "fail");
    os << "; equators=" << equators.size();
    os << "; max_f=" << fmt_g17(max_f);
    if (cone_point_warning) os << "; cone-point warning (pole slope off by "
                               << fmt_g17(std::max(pole_slope_dev_minus, pole_slope_dev_plus)) << ")";
    return os.str();
}

ValidationReport validate_profile(const Profile& p) {
    ValidationReport r;
    const double len = p.t_plus - p.t_minus;
    if (!(len > 0.0)) throw ParameterError("validate_profile: empty domain");

    // Interior positivity on a deterministic scan grid.
    const int scan_n = 4096;
    for (int i = 1; i < scan_n; ++i) {
        const double t = p.t_minus + len * i / scan_n;
        const double v = checked_eval(p.f, t, "f");
        if (v <= 0.0) r.positivity_violations.push_back(t);
        r.max_f = std::max(r.max_f, v);
    }
    r.positivity_ok = r.positivity_violations.empty();

    r.pole_value_minus = checked_eval(p.f, p.t_minus, "f");
    r.pole_value_plus = checked_eval(p.f, p.t_plus, "f");
    const bool poles_present = std::abs(r.pole_value_minus) <= 1e-12 && std::abs(r.pole_value_plus) <= 1e-12;
    r.poles_ok = !p.pole_smooth || poles_present;

    r.pole_slope_dev_minus = std::abs(std::abs(checked_eval(p.df, p.t_minus, "df")) - 1.0);
    r.pole_slope_dev_plus = std::abs(std::abs(checked_eval(p.df, p.t_plus, "df")) - 1.0);
    const double slope_dev = std::max(r.pole_slope_dev_minus, r.pole_slope_dev_plus);
    r.pole_slope_ok = !p.pole_smooth || slope_dev <= 1e-8;
    r.cone_point_warning = p.pole_smooth && poles_present && slope_dev > 1e-8;

    // df and d2f against centered differences at 100 deterministic interior points.
    Rng rng(0x9c0ffee5u);
    const double h = 1e-5 * len;
    for (int i = 0; i < 100; ++i) {
        const double t = p.t_minus + len * (0.02 + 0.96 * rng.next_double());
        const double fd1 = (p.f(t + h) - p.f(t - h)) / (2.0 * h);
        const double fd2 = (p.f(t + h) - 2.0 * p.f(t) + p.f(t - h)) / (h * h);
        const double e1 = std::abs(p.df(t) - fd1) / std::max(1.0, std::abs(fd1));
        const double e2 = std::abs(p.d2f(t) - fd2) / std::max(1.0, std::abs(fd2));
        r.max_derivative_mismatch = std::max({r.max_derivative_mismatch, e1, e2});
    }
    r.derivatives_ok = r.max_derivative_mismatch <= 1e-6;

    if (r.positivity_ok) {
        r.equators = equator_locate(p, 1e-10);
    }
    r.equators_nondegenerate = true;
    for (const auto& [t0, dd] : r.equators) {
        (void)t0;
        if (std::abs(dd) <= 1e-10) r.equators_nondegenerate = false;
    }

    r.cap_ok = !p.cap_at_one || std::abs(r.max_f - 1.0) <= 1e-8;

    r.pass = r.positivity_ok && r.poles_ok && r.derivatives_ok && r.equators_nondegenerate && r.cap_ok &&
             (r.pole_slope_ok || r.cone_point_warning);
    return r;
}

std::vector<std::pair<double, double>> equator_locate(const Profile& p, double tol) {
    std::vector<std::pair<double, double>> out;
    const double len = p.t_plus - p.t_minus;
    const int n = 2048;
    // Stay strictly inside: df may be +-1 at poles and irrelevant there.
    const double a = p.t_minus + 1e-9 * len;
    const double b = p.t_plus - 1e-9 * len;
    double prev_t = a;
    double prev_v = checked_eval(p.df, a, "df");
    for (int i = 1; i <= n; ++i) {
        const double t = a + (b - a) * i / n;
        const double v = checked_eval(p.df, t, "df");
        if (v == 0.0 || (v > 0.0) != (prev_v > 0.0)) {
            const double t0 = bisect(p.df, prev_t, t, 1e-15 * std::max(1.0, std::abs(t)));
            if (std::abs(p.df(t0)) <= tol) {
                const double dd = p.d2f(t0);
                if (std::abs(dd) > tol) out.emplace_back(t0, dd);
            }
        }
        prev_t = t;
        prev_v = v;
    }
    std::sort(out.begin(), out.end());
    // Merge duplicates from a root landing exactly on a grid node.
    out.erase(std::unique(out.begin(), out.end(),
                          [&](const auto& x, const auto& y) { return std::abs(x.first - y.first) < 1e-9 * len; }),
              out.end());
    return out;
}

Covector cosphere_embed(const Profile& p, double t, double theta) {
    const double ft = checked_eval(p.f, t, "f");
    if (ft <= 0.0) throw PoleError("cosphere_embed: f(t) <= 0 at t = " + fmt_g17(t));
    return Covector{std::cos(theta), ft * std::sin(theta)};
}

double cosphere_angle(const Profile& p, double t, const Covector& xi) {
    const double ft = checked_eval(p.f, t, "f");
    if (ft <= 0.0) throw PoleError("cosphere_angle: f(t) <= 0 at t = " + fmt_g17(t));
    return std::atan2(xi.xi_phi / ft, xi.xi_t);
}

Profile make_sphere() {
    Profile p;
    p.t_minus = -kPi / 2.0;
    p.t_plus = kPi / 2.0;
    p.f = [](double t) { return std::cos(t); };
    p.df = [](double t) { return -std::sin(t); };
    p.d2f = [](double t) { return -std::cos(t); };
    p.pole_smooth = true;
    p.cap_at_one = true;
    p.name = "sphere";
    return p;
}

Profile make_perturbed_sphere(double eps) {
    Profile p;
    p.t_minus = -kPi / 2.0;
    p.t_plus = kPi / 2.0;
    p.f = [eps](double t) {
        const double s = std::sin(t);
        return std::cos(t) * (1.0 - eps * s * s);
    };
    p.df = [eps](double t) {
        const double s = std::sin(t), c = std::cos(t);
        return -s * (1.0 - eps * s * s) - 2.0 * eps * s * c * c;
    };
    p.d2f = [eps](double t) {
        const double s = std::sin(t), c = std::cos(t);
        // d/dt of the above: -c(1 - eps s^2) + 2 eps s^2 c - 2 eps c^3 + 4 eps s^2 c
        return -c * (1.0 - eps * s * s) + 6.0 * eps * s * s * c - 2.0 * eps * c * c * c;
    };
    p.pole_smooth = true;  // asserted; validation downgrades to a cone-point warning
    p.cap_at_one = true;
    p.name = "perturbed-sphere(" + fmt_g17(eps) + ")";
    return p;
}

Profile make_spheroid(double eps) {
    Profile p;
    p.t_minus = 0.0;
    p.t_plus = kPi;
    p.f = [eps](double t) {
        const double s = std::sin(t);
        return s * (1.0 - eps * s * s);
    };
    p.df = [eps](double t) {
        const double s = std::sin(t), c = std::cos(t);
        return c * (1.0 - 3.0 * eps * s * s);
    };
    p.d2f = [eps](double t) {
        const double s = std::sin(t), c = std::cos(t);
        return -s * (1.0 - 3.0 * eps * s * s) - 6.0 * eps * s * c * c;
    };
    p.pole_smooth = true;
    p.cap_at_one = false;  // max f = 1 - eps at the equator
    p.name = "spheroid(" + fmt_g17(eps) + ")";
    return p;
}

namespace {

// Natural cubic spline through (t_i, f_i); evaluators for value and two
// derivatives. Supports the "custom" table profile path.
struct Spline {
    std::vector<double> t, y, m;  // m: second derivatives at the knots

    static Spline build(const std::vector<double>& t, const std::vector<double>& y) {
        const std::size_t n = t.size();
        Spline s{t, y, std::vector<double>(n, 0.0)};
        if (n < 3) return s;
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
        b[0] = 1.0;
        b[n - 1] = 1.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        // Thomas solve.
        for (std::size_t i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        s.m[n - 1] = d[n - 1] / b[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) s.m[i] = (d[i] - c[i] * s.m[i + 1]) / b[i];
        return s;
    }

    std::size_t segment(double x) const {
        const auto it = std::upper_bound(t.begin(), t.end(), x);
        std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - t.begin()));
        return std::min(i, t.size() - 1) - 1;
    }

    double value(double x) const {
        const std::size_t i = segment(x);
        const double h = t[i + 1] - t[i], u = t[i + 1] - x, v = x - t[i];
        return (m[i] * u * u * u + m[i + 1] * v * v * v) / (6.0 * h) + (y[i] / h - m[i] * h / 6.0) * u +
               (y[i + 1] / h - m[i + 1] * h / 6.0) * v;
    }
    double deriv(double x) const {
        const std::size_t i = segment(x);
        const double h = t[i + 1] - t[i], u = t[i + 1] - x, v = x - t[i];
        return (-m[i] * u * u + m[i + 1] * v * v) / (2.0 * h) - (y[i] / h - m[i] * h / 6.0) +
               (y[i + 1] / h - m[i + 1] * h / 6.0);
    }
    double deriv2(double x) const {
        const std::size_t i = segment(x);
        const double h = t[i + 1] - t[i], u = t[i + 1] - x, v = x - t[i];
        return (m[i] * u + m[i + 1] * v) / h;
    }
};

}  // namespace

Profile make_profile_from_table(const std::vector<double>& t, const std::vector<double>& f) {
    if (t.size() != f.size() || t.size() < 4) throw ParameterError("profile table: need >= 4 rows of (t, f)");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1])) throw ParameterError("profile table: t column must be strictly increasing");
    }
    auto sp = std::make_shared<Spline>(Spline::build(t, f));
    Profile p;
    p.t_minus = t.front();
    p.t_plus = t.back();
    p.f = [sp](double x) { return sp->value(x); };
    p.df = [sp](double x) { return sp->deriv(x); };
    p.d2f = [sp](double x) { return sp->deriv2(x); };
    p.pole_smooth = std::abs(f.front()) <= 1e-12 && std::abs(f.back()) <= 1e-12;
    p.cap_at_one = false;
    p.derivatives_from_fd = true;  // spline-derived, flagged in reports
    p.name = "custom";
    return p;
}

Profile load_profile_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open profile table: " + path);
    std::vector<double> t, f;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double a, b;
        if (ls >> a >> b) {
            t.push_back(a);
            f.push_back(b);
        }
    }
    return make_profile_from_table(t, f);
}

Profile make_profile(const std::string& spec) {
    auto param_of = [&](const std::string& prefix) -> std::optional<double> {
        if (spec.size() > prefix.size() + 1 && spec.compare(0, prefix.size() + 1, prefix + "(") == 0 &&
            spec.back() == ')') {
            return std::stod(spec.substr(prefix.size() + 1, spec.size() - prefix.size() - 2));
        }
        return std::nullopt;
    };
    if (spec == "sphere") return make_sphere();
    if (auto e = param_of("perturbed-sphere")) return make_perturbed_sphere(*e);
    if (auto e = param_of("spheroid")) return make_spheroid(*e);
    return load_profile_table(spec);
}

}  // namespace qci
