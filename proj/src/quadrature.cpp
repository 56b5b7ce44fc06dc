#include "lobq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace lobq {

namespace {

// 15-point Kronrod abscissae on [-1, 1] (positive half) and weights, with the
// embedded 7-point Gauss weights; standard QUADPACK values.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel eval_panel(const std::function<double(double)>& f, double a, double b) {
    double c = 0.5 * (a + b);
    double h = 0.5 * (b - a);
    double fc = f(c);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double fv[15];
    for (int j = 0; j < 7; ++j) {
        double x = h * kXgk[j];
        fv[j] = f(c - x);
        fv[j + 8] = f(c + x);
        double fsum = fv[j] + fv[j + 8];
        resk += kWgk[j] * fsum;
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    }
    Panel p;
    p.a = a;
    p.b = b;
    p.value = resk * h;
    p.error = std::fabs((resk - resg) * h);
    return p;
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol, int max_intervals,
                           double rel_tol) {
    QuadratureResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    std::priority_queue<Panel> panels;
    panels.push(eval_panel(f, a, b));
    res.evaluations = 15;
    double total_err = panels.top().error;
    double total_val = panels.top().value;
    int n = 1;
    auto done = [&] {
        return total_err <= abs_tol || total_err <= rel_tol * std::fabs(total_val);
    };
    while (!done() && n < max_intervals) {
        Panel worst = panels.top();
        panels.pop();
        double mid = 0.5 * (worst.a + worst.b);
        Panel left = eval_panel(f, worst.a, mid);
        Panel right = eval_panel(f, mid, worst.b);
        res.evaluations += 30;
        total_err += left.error + right.error - worst.error;
        total_val += left.value + right.value - worst.value;
        panels.push(left);
        panels.push(right);
        ++n;
    }
    // Re-sum from the panels for a cleaner accumulation.
    total_val = 0.0;
    total_err = 0.0;
    while (!panels.empty()) {
        total_val += panels.top().value;
        total_err += panels.top().error;
        panels.pop();
    }
    res.value = total_val;
    res.error_estimate = total_err;
    res.converged =
        total_err <= abs_tol || total_err <= rel_tol * std::fabs(total_val);
    return res;
}

namespace {

struct VecPanel {
    double a, b;
    std::vector<double> values;
    double error;
    bool operator<(const VecPanel& other) const { return error < other.error; }
};

VecPanel eval_vec_panel(const std::function<void(double, std::vector<double>&)>& f,
                        std::size_t dim, double a, double b,
                        std::vector<double>& fc, std::vector<double>& flo,
                        std::vector<double>& fhi) {
    double c = 0.5 * (a + b);
    double h = 0.5 * (b - a);
    VecPanel p;
    p.a = a;
    p.b = b;
    p.values.assign(dim, 0.0);
    std::vector<double> resg(dim, 0.0);
    f(c, fc);
    for (std::size_t d = 0; d < dim; ++d) {
        p.values[d] = fc[d] * kWgk[7];
        resg[d] = fc[d] * kWg[3];
    }
    for (int j = 0; j < 7; ++j) {
        double x = h * kXgk[j];
        f(c - x, flo);
        f(c + x, fhi);
        for (std::size_t d = 0; d < dim; ++d) {
            double fsum = flo[d] + fhi[d];
            p.values[d] += kWgk[j] * fsum;
            if (j % 2 == 1) resg[d] += kWg[j / 2] * fsum;
        }
    }
    p.error = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        double e = std::fabs((p.values[d] - resg[d]) * h);
        p.error = std::max(p.error, e);
        p.values[d] *= h;
    }
    return p;
}

}  // namespace

VectorQuadratureResult integrate_vector(
    const std::function<void(double, std::vector<double>&)>& f, std::size_t dim,
    double a, double b, double abs_tol, int max_intervals, double rel_tol) {
    VectorQuadratureResult res;
    res.values.assign(dim, 0.0);
    if (a == b || dim == 0) {
        res.converged = true;
        return res;
    }
    std::vector<double> fc(dim), flo(dim), fhi(dim);
    std::priority_queue<VecPanel> panels;
    panels.push(eval_vec_panel(f, dim, a, b, fc, flo, fhi));
    res.evaluations = 15;
    double total_err = panels.top().error;
    double scale = 0.0;
    for (double v : panels.top().values) scale = std::max(scale, std::fabs(v));
    int n = 1;
    while (total_err > std::max(abs_tol, rel_tol * scale) && n < max_intervals) {
        VecPanel worst = panels.top();
        panels.pop();
        double mid = 0.5 * (worst.a + worst.b);
        VecPanel left = eval_vec_panel(f, dim, worst.a, mid, fc, flo, fhi);
        VecPanel right = eval_vec_panel(f, dim, mid, worst.b, fc, flo, fhi);
        res.evaluations += 30;
        total_err += left.error + right.error - worst.error;
        panels.push(std::move(left));
        panels.push(std::move(right));
        ++n;
    }
    total_err = 0.0;
    while (!panels.empty()) {
        const VecPanel& p = panels.top();
        for (std::size_t d = 0; d < dim; ++d) res.values[d] += p.values[d];
        total_err += p.error;
        panels.pop();
    }
    res.error_estimate = total_err;
    for (double v : res.values) scale = std::max(scale, std::fabs(v));
    res.converged = total_err <= std::max(abs_tol, rel_tol * scale);
    return res;
}

}  // namespace lobq
