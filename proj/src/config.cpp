#include "rgo/config.hpp"

#include "rgo/preset_fields.hpp"

#include <cmath>
#include <fstream>

namespace rgo {

namespace {

double parse_bound(const json& j, double sign) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "-inf")
            return (s == "-inf" ? -1 : 1) * std::numeric_limits<double>::infinity() *
                   (sign < 0 && s == "inf" ? 1 : 1);
        throw ConfigError("unrecognized bound string: " + s);
    }
    return j.get<double>();
}

Domain parse_domain(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int levels = j.value("levels", 12);
    if (kind == "simplex")
        return Domain::simplex(j.at("d").get<int>(), j.value("eps0", 0.1), levels);
    auto parse_axis = [](const json& a) {
        AxisInterval ax;
        ax.lower = parse_bound(a.at("lower"), -1);
        ax.upper = parse_bound(a.at("upper"), +1);
        ax.lower_margin0 = a.at("lower_margin0").get<double>();
        ax.upper_margin0 = a.at("upper_margin0").get<double>();
        return ax;
    };
    if (kind == "interval") return Domain::interval(parse_axis(j), levels);
    if (kind == "box") {
        std::vector<AxisInterval> axes;
        for (const auto& a : j.at("axes")) axes.push_back(parse_axis(a));
        return Domain::box(std::move(axes), levels);
    }
    throw ConfigError("unknown domain kind: " + kind);
}

CovarianceFieldPtr parse_covariance(const json& j, const Domain& dom) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear1d") {
        const double xi = j.at("xi").get<double>();
        return std::make_shared<Poly1dCovariance>(std::vector<double>{0.0, xi * xi});
    }
    if (kind == "const1d")
        return std::make_shared<Poly1dCovariance>(std::vector<double>{j.at("value").get<double>()});
    if (kind == "poly1d")
        return std::make_shared<Poly1dCovariance>(j.at("coeffs").get<std::vector<double>>());
    if (kind == "identity")
        return std::make_shared<ConstDiagCovariance>(
            ConstDiagCovariance::identity(dom.ambient_dim()));
    if (kind == "const_diag") {
        const auto diag = j.at("diag").get<std::vector<double>>();
        Vec v(int(diag.size()));
        for (size_t i = 0; i < diag.size(); ++i) v[i] = diag[i];
        return std::make_shared<ConstDiagCovariance>(v);
    }
    throw ConfigError("unknown covariance kind: " + kind);
}

ScalarFieldPtr parse_density(const json& j, const Domain& dom) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gamma")
        return std::make_shared<GammaDensity>(j.at("shape").get<double>(), j.at("rate").get<double>());
    if (kind == "gauss1d")
        return std::make_shared<Gauss1dDensity>(j.value("mean", 0.0), j.value("sigma", 1.0));
    if (kind == "cauchy") return std::make_shared<CauchyDensity>();
    if (kind == "uniform") {
        const Truncation t = dom.exhaustion(1);
        double vol = 1;
        for (const auto& ax : dom.axes()) vol *= ax.upper - ax.lower;
        (void)t;
        return std::make_shared<UniformDensity>(dom.ambient_dim(), vol);
    }
    if (kind == "gauss_product") {
        const auto sig = j.at("sigmas").get<std::vector<double>>();
        if (j.value("truncated", false)) {
            std::vector<double> lo, hi;
            for (const auto& ax : dom.axes()) {
                lo.push_back(ax.lower);
                hi.push_back(ax.upper);
            }
            return std::make_shared<GaussProductDensity>(dom.ambient_dim(), sig, lo, hi);
        }
        return std::make_shared<GaussProductDensity>(dom.ambient_dim(), sig);
    }
    if (kind == "exppoly1d") {
        auto field = std::make_shared<ExpPoly1dDensity>(j.at("coeffs").get<std::vector<double>>());
        // normalize over the deepest truncation
        const Truncation t = dom.exhaustion(dom.levels());
        auto f = [&](double x) {
            Vec v(1);
            v[0] = x;
            return field->value(v);
        };
        const double mass = integrate_adaptive(f, t.lo[0], t.hi[0], 1e-12);
        field->set_norm(1.0 / mass);
        return field;
    }
    throw ConfigError("unknown density kind: " + kind);
}

rank::ThetaParams parse_theta_params(const json& j) {
    rank::ThetaParams p;
    p.A = j.value("A", 2.0);
    p.B = j.value("B", 2.0);
    p.C = j.value("C", 0.0);
    p.K = j.value("K", 0.0);
    p.validate();
    return p;
}

RankSetup parse_rank(const json& j, int d) {
    RankSetup setup;
    const json& kappa = j.at("kappa");
    const std::string kind = kappa.at("kind").get<std::string>();
    setup.params = parse_theta_params(kappa);
    if (kind == "theta") {
        setup.raw_inputs = rank::pure_theta_inputs_d2(setup.params);
        if (d != 2) throw ConfigError("the pure-theta preset pairs with d = 2");
    } else if (kind == "theta_tilt") {
        setup.raw_inputs = rank::tilted_theta_inputs(d, setup.params, kappa.value("tilt", 0.3));
    } else {
        throw ConfigError("unknown rank covariance kind: " + kind);
    }
    if (j.contains("modify")) {
        rank::CutoffSpec cutoff{};
        cutoff.delta = j.at("modify").value("delta", 0.15);
        setup.cutoff = cutoff;
        setup.inputs = rank::modify(setup.raw_inputs, cutoff, setup.params);
    } else {
        setup.inputs = setup.raw_inputs;
        if (!setup.inputs.tie_smooth)
            throw ConfigError("rank inputs without the boundary modification must be tie-smooth");
    }
    return setup;
}

}  // namespace

LoadedModel build_model(const json& config) {
    if (config.value("schema", 0) != 1) throw ConfigError("config requires \"schema\": 1");
    LoadedModel out;
    out.raw = config;
    out.name = config.value("name", "unnamed");

    Domain dom = parse_domain(config.at("domain"));
    if (dom.kind() == DomainKind::simplex) {
        out.rank_setup = parse_rank(config.at("rank"), dom.ambient_dim());
        out.model = rank::symmetrize(out.rank_setup->inputs,
                                     config.value("mass_tolerance", 5e-3));
        out.model.name = out.name;
    } else {
        out.model.domain = dom;
        out.model.c = parse_covariance(config.at("covariance"), dom);
        out.model.p = parse_density(config.at("density"), dom);
        out.model.mass_tolerance = config.value("mass_tolerance", 1e-6);
        out.model.name = out.name;
    }

    if (config.contains("gradient_h")) {
        const std::string kind = config.at("gradient_h").at("kind").get<std::string>();
        if (kind == "zero") {
            out.gradient_h = std::make_shared<ConstantField>(out.model.ambient_dim(), 0.0);
        } else if (kind == "log_c") {
            if (out.model.ambient_dim() != 1)
                throw ConfigError("gradient_h log_c applies to one-dimensional models");
            out.gradient_h = std::make_shared<LogPC1dField>(
                std::make_shared<ConstantField>(1, 1.0) /*placeholder density = 1*/, out.model.c);
        } else if (kind == "theta_potential") {
            out.gradient_h = rank::theta_potential(out.rank_setup->params, out.model.ambient_dim());
        } else {
            throw ConfigError("unknown gradient_h kind: " + kind);
        }
    }

    if (config.contains("expected")) {
        const json& e = config.at("expected");
        if (e.contains("classification"))
            out.expected.classification = e.at("classification").get<std::string>();
        if (e.contains("lambda")) out.expected.lambda = e.at("lambda").get<double>();
    }
    return out;
}

LoadedModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return build_model(j);
}

void validate_against_schema(const json& doc, const json& schema, const std::string& where) {
    if (schema.contains("type")) {
        const std::string t = schema.at("type").get<std::string>();
        const bool ok = (t == "object" && doc.is_object()) || (t == "array" && doc.is_array()) ||
                        (t == "string" && doc.is_string()) ||
                        (t == "number" && doc.is_number()) ||
                        (t == "integer" && doc.is_number_integer()) ||
                        (t == "boolean" && doc.is_boolean()) || (t == "null" && doc.is_null());
        if (!ok) throw ConfigError(where + ": expected type " + t);
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& v : schema.at("enum")) ok = ok || v == doc;
        if (!ok) throw ConfigError(where + ": value not in enum");
    }
    if (schema.contains("required"))
        for (const auto& key : schema.at("required"))
            if (!doc.contains(key.get<std::string>()))
                throw ConfigError(where + ": missing required key " + key.get<std::string>());
    if (schema.contains("properties") && doc.is_object())
        for (auto it = schema.at("properties").begin(); it != schema.at("properties").end(); ++it)
            if (doc.contains(it.key()))
                validate_against_schema(doc.at(it.key()), it.value(), where + "." + it.key());
    if (schema.contains("items") && doc.is_array())
        for (size_t i = 0; i < doc.size(); ++i)
            validate_against_schema(doc[i], schema.at("items"), where + "[" + std::to_string(i) + "]");
}

}  // namespace rgo
