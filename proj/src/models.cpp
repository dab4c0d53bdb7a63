#include "rlhd/models.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <string>

#include "rlhd/error.hpp"
#include "rlhd/rng.hpp"

namespace rlhd {

namespace {

void check_a(std::span<const double> a) {
    for (double v : a)
        if (v == -1.0) throw DomainError("g-function coefficient a = -1 divides by zero");
}

double parse_number(const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw UsageError("bad number '" + text + "' in model id");
        return v;
    } catch (const std::logic_error&) {
        throw UsageError("bad number '" + text + "' in model id");
    }
}

BuiltinModel from_structure(std::string id, GFamily g) {
    BuiltinModel m;
    m.id = std::move(id);
    m.dimension = g.dimension();
    m.evaluate = [g](std::span<const double> x) { return g(x); };
    m.structure = std::move(g);
    return m;
}

}  // namespace

double GFamily::operator()(std::span<const double> x) const {
    if (x.size() != dimension())
        throw DomainError("model expects " + std::to_string(dimension()) + " inputs, got " + std::to_string(x.size()));
    double prod = 1.0;
    for (std::size_t j = 0; j < a.size(); ++j) prod *= (std::fabs(4.0 * x[j] - 2.0) + c[j]) / (1.0 + a[j]);
    if (tail.empty()) return prod;
    double lin = 0.0;
    for (std::size_t j = 0; j < tail.size(); ++j) lin += tail[j] * x[a.size() + j];
    return (a.empty() ? 0.0 : prod) + lin;
}

GFamily GFamily::modified(std::vector<double> a, std::vector<double> tail) {
    check_a(a);
    GFamily g;
    for (double v : a) g.c.push_back(2.0 + 3.0 * v);
    g.a = std::move(a);
    g.tail = std::move(tail);
    return g;
}

GFamily GFamily::standard(std::vector<double> a, std::vector<double> tail) {
    check_a(a);
    GFamily g;
    g.c = a;
    g.a = std::move(a);
    g.tail = std::move(tail);
    return g;
}

double modified_g(std::span<const double> x, std::span<const double> a) {
    if (a.size() != 3 || x.size() != 3) throw DomainError("modified_g takes three inputs and three coefficients");
    check_a(a);
    double prod = 1.0;
    for (std::size_t j = 0; j < 3; ++j) prod *= (std::fabs(4.0 * x[j] - 2.0) + 2.0 + 3.0 * a[j]) / (1.0 + a[j]);
    return prod;
}

double modified_g_linear(std::span<const double> x, std::span<const double> a, double eps) {
    if (x.size() != 10) throw DomainError("modified_g_linear takes ten inputs");
    double lin = 0.0;
    for (std::size_t j = 3; j < 10; ++j) lin += x[j];
    return modified_g(x.subspan(0, 3), a) + eps * lin;
}

double g_sobol(std::span<const double> x, std::span<const double> a) {
    if (x.size() != a.size()) throw DomainError("g_sobol: input and coefficient counts differ");
    check_a(a);
    double prod = 1.0;
    for (std::size_t j = 0; j < a.size(); ++j) prod *= (std::fabs(4.0 * x[j] - 2.0) + a[j]) / (1.0 + a[j]);
    return prod;
}

std::vector<std::string> builtin_model_ids() {
    return {"mod-g-19-9-4", "mod-g-lin-eps0.10", "g-sobol-d10-a0", "mod-g-10-10-4"};
}

BuiltinModel resolve_model(const std::string& id) {
    if (id == "mod-g-10-10-4")
        return from_structure(id, GFamily::modified({10, 10, 4}, std::vector<double>(7, 0.10)));

    static const std::regex lin(R"(mod-g-lin-eps([0-9.eE+-]+))");
    static const std::regex modg(R"(mod-g-([0-9.]+)-([0-9.]+)-([0-9.]+))");
    static const std::regex gsob(R"(g-sobol-d([0-9]+)-a([0-9.]+))");
    static const std::regex additive(R"(additive-d([0-9]+))");
    std::smatch m;
    if (std::regex_match(id, m, lin))
        return from_structure(id, GFamily::modified({19, 9, 4}, std::vector<double>(7, parse_number(m[1]))));
    if (std::regex_match(id, m, modg))
        return from_structure(id, GFamily::modified({parse_number(m[1]), parse_number(m[2]), parse_number(m[3])}));
    if (std::regex_match(id, m, gsob)) {
        const auto d = static_cast<std::size_t>(parse_number(m[1]));
        if (d < 1) throw UsageError("g-sobol model needs d >= 1");
        return from_structure(id, GFamily::standard(std::vector<double>(d, parse_number(m[2]))));
    }
    if (std::regex_match(id, m, additive)) {
        const auto d = static_cast<std::size_t>(parse_number(m[1]));
        if (d < 1) throw UsageError("additive model needs d >= 1");
        return from_structure(id, GFamily{{}, {}, std::vector<double>(d, 1.0)});
    }
    if (id == "product-d2") {
        BuiltinModel p;
        p.id = id;
        p.dimension = 2;
        p.evaluate = [](std::span<const double> x) {
            if (x.size() != 2) throw DomainError("product-d2 takes two inputs");
            return x[0] * x[1];
        };
        return p;
    }
    throw UsageError("unknown model id '" + id + "'");
}

AnalyticIndices analytic_indices(const GFamily& g) {
    const std::size_t p = g.a.size();
    std::vector<double> mean(p), var(p);
    for (std::size_t j = 0; j < p; ++j) {
        // |4U - 2| is uniform on [0, 2]: mean 1, variance 1/3.
        mean[j] = (1.0 + g.c[j]) / (1.0 + g.a[j]);
        var[j] = (1.0 / 3.0) / ((1.0 + g.a[j]) * (1.0 + g.a[j]));
    }
    double prod_second = 1.0, prod_mean_sq = 1.0, prod_mean = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
        prod_second *= mean[j] * mean[j] + var[j];
        prod_mean_sq *= mean[j] * mean[j];
        prod_mean *= mean[j];
    }
    double tail_var = 0.0, tail_mean = 0.0;
    for (double e : g.tail) {
        tail_var += e * e / 12.0;
        tail_mean += e / 2.0;
    }
    AnalyticIndices out;
    out.total_variance = (p ? prod_second - prod_mean_sq : 0.0) + tail_var;
    out.mean = (p ? prod_mean : 0.0) + tail_mean;
    if (!(out.total_variance > 0.0)) throw DegenerateModelError("model has zero variance");
    const double D = out.total_variance;
    for (std::size_t i = 0; i < p; ++i) {
        double others_mean_sq = 1.0, others_second = 1.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (j == i) continue;
            others_mean_sq *= mean[j] * mean[j];
            others_second *= mean[j] * mean[j] + var[j];
        }
        out.first_order.push_back(var[i] * others_mean_sq / D);
        out.total_order.push_back(var[i] * others_second / D);
    }
    for (double e : g.tail) {
        out.first_order.push_back(e * e / 12.0 / D);
        out.total_order.push_back(e * e / 12.0 / D);
    }
    return out;
}

AnalyticIndices analytic_indices(const BuiltinModel& model) {
    if (!model.structure) throw UnsupportedError("no closed-form indices for model '" + model.id + "'");
    return analytic_indices(*model.structure);
}

IndexEstimates brute_force_indices(const Evaluator& model, std::size_t d, std::size_t n_mc, std::uint64_t seed,
                                   bool allow_small) {
    if (n_mc < 10000 && !allow_small) throw DomainError("brute_force_indices needs n_mc >= 10^4");
    if (n_mc < 2 || d < 1) throw DomainError("brute_force_indices needs n_mc >= 2 and d >= 1");
    RandomStream stream(seed, "brute-force");
    std::vector<double> a(d), b(d), ab(d);
    std::vector<double> s1(d, 0.0), s1sq(d, 0.0), st(d, 0.0), stsq(d, 0.0);
    // Welford accumulation of the pooled output variance over both sample matrices.
    double mean = 0.0, m2 = 0.0;
    std::size_t count = 0;
    auto push = [&](double y) {
        ++count;
        const double delta = y - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (y - mean);
    };
    for (std::size_t k = 0; k < n_mc; ++k) {
        for (std::size_t j = 0; j < d; ++j) a[j] = stream.uniform01();
        for (std::size_t j = 0; j < d; ++j) b[j] = stream.uniform01();
        const double fa = model(a);
        const double fb = model(b);
        push(fa);
        push(fb);
        for (std::size_t i = 0; i < d; ++i) {
            ab = a;
            ab[i] = b[i];
            const double fab = model(ab);
            const double t1 = fb * (fab - fa);
            const double t2 = 0.5 * (fa - fab) * (fa - fab);
            s1[i] += t1;
            s1sq[i] += t1 * t1;
            st[i] += t2;
            stsq[i] += t2 * t2;
        }
    }
    const double n = static_cast<double>(n_mc);
    const double var = m2 / static_cast<double>(count - 1);
    if (!(var > 0.0)) throw DegenerateModelError("model has zero variance on the sample");

    IndexEstimates out;
    out.total_variance = var;
    for (std::size_t i = 0; i < d; ++i) {
        const double m1 = s1[i] / n, mt = st[i] / n;
        const double v1 = std::max(0.0, s1sq[i] / n - m1 * m1);
        const double vt = std::max(0.0, stsq[i] / n - mt * mt);
        out.first_order.push_back(m1 / var);
        out.total_order.push_back(mt / var);
        out.first_order_se.push_back(std::sqrt(v1 / n) / var);
        out.total_order_se.push_back(std::sqrt(vt / n) / var);
    }
    return out;
}

}  // namespace rlhd
