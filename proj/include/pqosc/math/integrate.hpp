#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <vector>

namespace pqosc {

/// Trapezoidal weights on a uniform grid with n+1 points, spacing h.
inline std::vector<double> trapezoid_weights(std::size_t npts, double h) {
    assert(npts >= 2);
    std::vector<double> w(npts, h);
    w.front() = 0.5 * h;
    w.back() = 0.5 * h;
    return w;
}

template <class F>
double trapezoid(const F& f, double a, double b, std::size_t n) {
    const double h = (b - a) / double(n);
    double acc = 0.5 * (f(a) + f(b));
    for (std::size_t i = 1; i < n; ++i) acc += f(a + h * double(i));
    return acc * h;
}

struct QuadResult {
    double value = 0.0;
    double error = 0.0;   // estimated absolute error
    int evaluations = 0;
};

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1, 1].
constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0};
constexpr double kGK15Weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
void gk15(const F& f, double a, double b, double& value, double& err) {
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    double pair[8];
    for (int i = 0; i < 7; ++i) {
        const double x = r * kGK15Nodes[i];
        pair[i] = f(c - x) + f(c + x);
    }
    pair[7] = f(c);
    double k = 0.0;
    for (int i = 0; i < 8; ++i) k += kGK15Weights[i] * pair[i];
    double g = kG7Weights[3] * pair[7];
    for (int i = 1; i < 7; i += 2) g += kG7Weights[i / 2] * pair[i];
    value = k * r;
    const double diff = std::abs(k - g) * std::abs(r);
    err = std::min(200.0 * diff, std::pow(200.0 * diff, 1.5));
    if (err == 0.0) err = std::abs(value) * 1e-15;
}

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

} // namespace detail

/// Globally adaptive Gauss-Kronrod integration on [a, b].
/// Stops when est. error <= max(abs_tol, rel_tol*|I|) or the interval budget
/// is exhausted (the returned error field then reports the achieved bound).
template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b,
                              double rel_tol = 1e-10, double abs_tol = 0.0,
                              int max_intervals = 2000,
                              const std::vector<double>& breakpoints = {}) {
    QuadResult res;
    if (a == b) return res;
    std::vector<double> edges{a};
    for (double x : breakpoints)
        if (x > a && x < b) edges.push_back(x);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());

    std::priority_queue<detail::Segment> heap;
    double total = 0.0, toterr = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        detail::Segment s{edges[i], edges[i + 1], 0.0, 0.0};
        detail::gk15(f, s.a, s.b, s.value, s.error);
        res.evaluations += 22;
        total += s.value;
        toterr += s.error;
        heap.push(s);
    }
    int n = int(edges.size()) - 1;
    while (n < max_intervals) {
        const double goal = std::max(abs_tol, rel_tol * std::abs(total));
        if (toterr <= goal) break;
        detail::Segment s = heap.top();
        heap.pop();
        const double m = 0.5 * (s.a + s.b);
        detail::Segment l{s.a, m, 0.0, 0.0}, r{m, s.b, 0.0, 0.0};
        detail::gk15(f, l.a, l.b, l.value, l.error);
        detail::gk15(f, r.a, r.b, r.value, r.error);
        res.evaluations += 44;
        total += l.value + r.value - s.value;
        toterr += l.error + r.error - s.error;
        heap.push(l);
        heap.push(r);
        ++n;
    }
    res.value = total;
    res.error = toterr;
    return res;
}

/// Adaptive quadrature of f(w)*cos(w*s)-type oscillatory integrands: the
/// caller passes the full integrand; this wrapper seeds subdivision at
/// half-period breakpoints of the oscillation frequency s so the adaptive
/// pass starts resolved.
template <class F>
QuadResult integrate_oscillatory(const F& f, double a, double b, double osc_freq,
                                 double rel_tol = 1e-9, double abs_tol = 0.0,
                                 int max_intervals = 4000) {
    std::vector<double> brk;
    if (osc_freq > 0.0) {
        const double half_period = M_PI / osc_freq;
        const double span = b - a;
        const int k = int(std::min(900.0, span / half_period));
        brk.reserve(k);
        for (int i = 1; i <= k; ++i) brk.push_back(a + half_period * i);
    }
    return integrate_adaptive(f, a, b, rel_tol, abs_tol, max_intervals, brk);
}

} // namespace pqosc
