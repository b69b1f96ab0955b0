#include "branchtail/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "branchtail/asymptotics.hpp"
#include "branchtail/error.hpp"

namespace branchtail {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    fail(errc::config, "config error at " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) bad(where, "expected an object");
    for (const auto& item : obj.items())
        if (allowed.find(item.key()) == allowed.end()) bad(where, "unknown key '" + item.key() + "'");
}

double need_number(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) bad(where, "missing key '" + key + "'");
    if (!obj[key].is_number()) bad(where + "." + key, "expected a number");
    return obj[key].get<double>();
}

double opt_number(const json& obj, const std::string& where, const std::string& key, double dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_number()) bad(where + "." + key, "expected a number");
    return obj[key].get<double>();
}

std::uint64_t opt_count(const json& obj, const std::string& where, const std::string& key,
                        std::uint64_t dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_number_integer() || obj[key].get<long long>() < 0)
        bad(where + "." + key, "expected a nonnegative integer");
    return obj[key].get<std::uint64_t>();
}

std::string need_string(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) bad(where, "missing key '" + key + "'");
    if (!obj[key].is_string()) bad(where + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

ScalarDist parse_dist(const json& obj, const std::string& where) {
    if (!obj.is_object()) bad(where, "expected a distribution object");
    std::string kind = need_string(obj, where, "kind");
    if (kind == "pareto") {
        check_keys(obj, where, {"kind", "alpha", "xm"});
        double alpha = need_number(obj, where, "alpha");
        double xm = need_number(obj, where, "xm");
        if (alpha <= 0.0 || xm <= 0.0) bad(where, "pareto needs alpha > 0 and xm > 0");
        return ParetoDist{alpha, xm};
    }
    if (kind == "pareto_int") {
        check_keys(obj, where, {"kind", "alpha", "xm"});
        double alpha = need_number(obj, where, "alpha");
        double xm = need_number(obj, where, "xm");
        if (alpha <= 0.0 || xm <= 0.0) bad(where, "pareto_int needs alpha > 0 and xm > 0");
        return ParetoIntDist{alpha, xm};
    }
    if (kind == "exponential") {
        check_keys(obj, where, {"kind", "rate"});
        double rate = need_number(obj, where, "rate");
        if (rate <= 0.0) bad(where, "exponential needs rate > 0");
        return ExponentialDist{rate};
    }
    if (kind == "poisson") {
        check_keys(obj, where, {"kind", "mean"});
        double mean = need_number(obj, where, "mean");
        if (mean < 0.0) bad(where, "poisson needs mean >= 0");
        return PoissonDist{mean};
    }
    if (kind == "constant") {
        check_keys(obj, where, {"kind", "value"});
        double value = need_number(obj, where, "value");
        if (value < 0.0) bad(where, "constant needs value >= 0");
        return ConstantDist{value};
    }
    if (kind == "bernoulli") {
        check_keys(obj, where, {"kind", "p"});
        double p = need_number(obj, where, "p");
        if (p < 0.0 || p > 1.0) bad(where, "bernoulli needs p in [0,1]");
        return BernoulliDist{p};
    }
    if (kind == "empirical") {
        check_keys(obj, where, {"kind", "values"});
        if (!obj.contains("values") || !obj["values"].is_array() || obj["values"].empty())
            bad(where, "empirical needs a nonempty values array");
        EmpiricalDist d;
        for (const auto& v : obj["values"]) {
            if (!v.is_number() || v.get<double>() < 0.0)
                bad(where + ".values", "expected nonnegative numbers");
            d.values.push_back(v.get<double>());
        }
        return d;
    }
    bad(where, "unknown distribution kind '" + kind + "'");
}

RVTail parse_rvtail(const json& obj, const std::string& where, bool allow_b) {
    std::set<std::string> keys = {"alpha", "xm"};
    if (allow_b) keys.insert("b");
    check_keys(obj, where, keys);
    RVTail t;
    t.alpha = need_number(obj, where, "alpha");
    t.xm = need_number(obj, where, "xm");
    t.b = opt_number(obj, where, "b", 1.0);
    if (t.alpha <= 0.0 || t.xm <= 0.0 || t.b < 0.0) bad(where, "invalid tail parameters");
    return t;
}

AngularMeasure parse_atoms(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.empty()) bad(where, "expected a nonempty atoms array");
    AngularMeasure mu;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string aw = where + "[" + std::to_string(i) + "]";
        check_keys(arr[i], aw, {"weight", "theta"});
        AngularAtom atom;
        atom.weight = need_number(arr[i], aw, "weight");
        if (!arr[i].contains("theta") || !arr[i]["theta"].is_array()) bad(aw, "missing theta array");
        for (const auto& t : arr[i]["theta"]) {
            if (!t.is_number()) bad(aw + ".theta", "expected numbers");
            atom.theta.push_back(t.get<double>());
        }
        mu.atoms.push_back(std::move(atom));
    }
    try {
        mu.validate();
    } catch (const Error& e) {
        bad(where, e.what());
    }
    return mu;
}

JointModel parse_pair_model(const json& obj, const std::string& where, const std::string& kind) {
    if (kind == "mg1") {
        check_keys(obj, where, {"kind", "q", "lambda"});
        MG1Pair m;
        if (!obj.contains("q")) bad(where, "missing key 'q'");
        m.q = parse_dist(obj["q"], where + ".q");
        m.lambda = need_number(obj, where, "lambda");
        if (m.lambda < 0.0) bad(where, "lambda must be >= 0");
        return m;
    }
    if (kind == "independent") {
        check_keys(obj, where, {"kind", "q", "n"});
        if (!obj.contains("q") || !obj.contains("n")) bad(where, "independent pair needs q and n");
        return IndependentPair{parse_dist(obj["q"], where + ".q"), parse_dist(obj["n"], where + ".n")};
    }
    if (kind == "linked_floor") {
        check_keys(obj, where, {"kind", "q", "slope", "noise"});
        LinkedFloor m;
        if (!obj.contains("q") || !obj.contains("noise")) bad(where, "linked_floor needs q and noise");
        m.q = parse_dist(obj["q"], where + ".q");
        m.noise = parse_dist(obj["noise"], where + ".noise");
        m.slope = need_number(obj, where, "slope");
        if (m.slope < 0.0) bad(where, "slope must be >= 0");
        return m;
    }
    if (kind == "atomic_mrv") {
        check_keys(obj, where, {"kind", "radial", "atoms"});
        AtomicMRV m;
        if (!obj.contains("radial")) bad(where, "atomic_mrv needs a radial tail");
        m.radial = parse_rvtail(obj["radial"], where + ".radial", true);
        if (m.radial.b > 1.0) bad(where + ".radial", "sampling multiplier b must lie in [0,1]");
        m.angular = parse_atoms(obj["atoms"], where + ".atoms");
        if (m.angular.dimension() != 2) bad(where + ".atoms", "pair atoms need dimension 2");
        return m;
    }
    bad(where, "unknown model kind '" + kind + "'");
}

std::shared_ptr<const MulticlassModel> parse_model(const json& obj, const std::string& where,
                                                   std::uint64_t cap);

std::shared_ptr<const MulticlassModel> parse_multiclass(const json& obj, const std::string& where) {
    check_keys(obj, where, {"kind", "classes", "radial"});
    const json& arr = obj["classes"];
    if (!arr.is_array() || arr.empty()) bad(where + ".classes", "expected a nonempty array");
    const std::size_t k = arr.size();

    std::optional<RVTail> radial;
    if (obj.contains("radial")) {
        radial = parse_rvtail(obj["radial"], where + ".radial", false);
        radial->b = 1.0;
    }

    std::vector<TypeModel> classes;
    classes.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::string cw = where + ".classes[" + std::to_string(i) + "]";
        const json& cls = arr[i];
        std::string kind = need_string(cls, cw, "kind");
        if (kind == "independent") {
            check_keys(cls, cw, {"kind", "q", "n"});
            IndependentVec iv;
            if (!cls.contains("q")) bad(cw, "missing key 'q'");
            iv.q = parse_dist(cls["q"], cw + ".q");
            if (!cls.contains("n") || !cls["n"].is_array() || cls["n"].size() != k)
                bad(cw, "independent class needs an n array with one entry per type");
            for (std::size_t j = 0; j < k; ++j)
                iv.n.push_back(parse_dist(cls["n"][j], cw + ".n[" + std::to_string(j) + "]"));
            classes.push_back(std::move(iv));
        } else if (kind == "atomic_mrv") {
            check_keys(cls, cw, {"kind", "b", "atoms"});
            if (!radial.has_value()) bad(cw, "atomic classes need a model-level radial tail");
            AtomicMRVVec av;
            av.b = opt_number(cls, cw, "b", 1.0);
            if (av.b < 0.0 || av.b > 1.0) bad(cw, "class multiplier b must lie in [0,1]");
            av.angular = parse_atoms(cls["atoms"], cw + ".atoms");
            if (av.angular.dimension() != k + 1) bad(cw + ".atoms", "atoms need dimension K+1");
            classes.push_back(std::move(av));
        } else {
            bad(cw, "unknown class kind '" + kind + "'");
        }
    }
    return std::make_shared<MulticlassModel>(MulticlassModel::from_classes(std::move(classes), radial));
}

std::shared_ptr<const MulticlassModel> parse_model(const json& obj, const std::string& where,
                                                   std::uint64_t cap) {
    if (!obj.is_object()) bad(where, "expected a model object");
    if (obj.contains("classes")) {
        if (obj.contains("kind") && obj["kind"] != "multiclass")
            bad(where, "models with classes must have kind 'multiclass'");
        return parse_multiclass(obj, where);
    }
    std::string kind = need_string(obj, where, "kind");
    if (kind == "reduced") {
        check_keys(obj, where, {"kind", "parent", "provenance", "declared"});
        if (!obj.contains("parent")) bad(where, "reduced model needs a parent");
        auto parent = parse_model(obj["parent"], where + ".parent", cap);
        auto model = std::make_shared<MulticlassModel>(MulticlassModel::reduced_from(parent, cap));
        if (obj.contains("declared")) {
            const json& dec = obj["declared"];
            check_keys(dec, where + ".declared", {"M", "qbar"});
            const std::size_t k = model->type_count();
            if (dec.contains("qbar")) {
                if (!dec["qbar"].is_array() || dec["qbar"].size() != k)
                    bad(where + ".declared.qbar", "wrong length");
                for (std::size_t i = 0; i < k; ++i)
                    if (std::fabs(dec["qbar"][i].get<double>() - model->qbar()[i]) > 1e-9)
                        bad(where + ".declared.qbar", "does not match the recomputed reduction");
            }
            if (dec.contains("M")) {
                if (!dec["M"].is_array() || dec["M"].size() != k) bad(where + ".declared.M", "wrong shape");
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j)
                        if (std::fabs(dec["M"][i][j].get<double>() - model->mean_matrix()(i, j)) > 1e-9)
                            bad(where + ".declared.M", "does not match the recomputed reduction");
            }
        }
        return model;
    }
    if (kind == "multiclass") bad(where, "multiclass models need a classes array");
    return std::make_shared<MulticlassModel>(MulticlassModel::single(parse_pair_model(obj, where, kind)));
}

SimKind parse_kind(const std::string& s, const std::string& where) {
    if (s == "progeny") return SimKind::progeny;
    if (s == "tau") return SimKind::tau;
    if (s == "weight") return SimKind::weight;
    bad(where, "unknown sim kind '" + s + "' (progeny|tau|weight)");
}

} // namespace

std::uint64_t RunConfig::prediction_seed() const {
    if (validate.prediction_seed.has_value()) return *validate.prediction_seed;
    // Out-of-sample by construction: decorrelated from the simulation seed.
    return sim.seed ^ 0xA5A55A5AF00DBEEFULL;
}

RunConfig load_config_text(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(errc::config, std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc, "$", {"model", "sim", "validate", "reduce"});
    if (!doc.contains("model")) bad("$", "missing key 'model'");

    RunConfig cfg;

    if (doc.contains("sim")) {
        const json& sim = doc["sim"];
        check_keys(sim, "$.sim",
                   {"kind", "seed", "replications", "cap", "workers", "k0", "k1", "type"});
        cfg.sim.seed = opt_count(sim, "$.sim", "seed", 1);
        cfg.sim.replications = opt_count(sim, "$.sim", "replications", 100000);
        cfg.sim.cap = opt_count(sim, "$.sim", "cap", 10000000);
        if (cfg.sim.replications < 1) bad("$.sim.replications", "must be >= 1");
        if (cfg.sim.cap < 1) bad("$.sim.cap", "must be >= 1");
        auto workers = opt_count(sim, "$.sim", "workers", 1);
        if (workers < 1 || workers > 4096) bad("$.sim.workers", "must lie in 1..4096");
        cfg.sim.workers = static_cast<unsigned>(workers);
        if (sim.contains("kind")) cfg.task.kind = parse_kind(need_string(sim, "$.sim", "kind"), "$.sim.kind");
        cfg.task.k0 = opt_number(sim, "$.sim", "k0", 0.0);
        cfg.task.k1 = opt_number(sim, "$.sim", "k1", 1.0);
        auto type = opt_count(sim, "$.sim", "type", 1);
        if (type < 1) bad("$.sim.type", "types are 1-based");
        cfg.task.type = static_cast<std::size_t>(type - 1);
    }

    if (doc.contains("validate")) {
        const json& val = doc["validate"];
        check_keys(val, "$.validate",
                   {"grid", "band", "prediction_seed", "prediction_samples", "rbar_override"});
        if (val.contains("grid")) {
            if (!val["grid"].is_array() || val["grid"].empty())
                bad("$.validate.grid", "expected a nonempty array");
            cfg.validate.grid.clear();
            for (const auto& q : val["grid"]) {
                if (!q.is_number() || !(q.get<double>() > 0.0 && q.get<double>() < 1.0))
                    bad("$.validate.grid", "quantiles must lie in (0,1)");
                cfg.validate.grid.push_back(q.get<double>());
            }
        }
        if (val.contains("band")) {
            if (!val["band"].is_array() || val["band"].size() != 2)
                bad("$.validate.band", "expected [lo, hi]");
            cfg.validate.band_lo = val["band"][0].get<double>();
            cfg.validate.band_hi = val["band"][1].get<double>();
            if (!(cfg.validate.band_lo > 0.0 && cfg.validate.band_lo < cfg.validate.band_hi))
                bad("$.validate.band", "need 0 < lo < hi");
        }
        if (val.contains("prediction_seed"))
            cfg.validate.prediction_seed = opt_count(val, "$.validate", "prediction_seed", 0);
        cfg.validate.prediction_samples =
            opt_count(val, "$.validate", "prediction_samples", 1000000);
        if (val.contains("rbar_override")) {
            double r = need_number(val, "$.validate", "rbar_override");
            if (r <= 0.0) bad("$.validate.rbar_override", "must be positive");
            cfg.validate.rbar_override = r;
        }
    }

    if (doc.contains("reduce")) {
        const json& red = doc["reduce"];
        check_keys(red, "$.reduce", {"permutation"});
        if (red.contains("permutation")) {
            if (!red["permutation"].is_array()) bad("$.reduce.permutation", "expected an array");
            std::vector<std::size_t> order;
            for (const auto& v : red["permutation"]) {
                if (!v.is_number_integer() || v.get<long long>() < 1)
                    bad("$.reduce.permutation", "expected 1-based type indices");
                order.push_back(v.get<std::size_t>() - 1);
            }
            cfg.reduce_permutation = std::move(order);
        }
    }

    cfg.model = parse_model(doc["model"], "$.model", cfg.sim.cap);
    if (cfg.task.type >= cfg.model->type_count()) bad("$.sim.type", "type exceeds the class count");
    if (cfg.validate.rbar_override.has_value() && cfg.model->single_pair() == nullptr)
        bad("$.validate.rbar_override", "only supported for single-class models");

    cfg.model_json = doc["model"].dump();
    cfg.model_hash = hex64(fnv1a64(cfg.model_json));
    cfg.config_hash = hex64(fnv1a64(doc.dump()));
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io, "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) fail(errc::io, "cannot read config file: " + path);
    return load_config_text(buf.str());
}

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Reorders the types of a multiclass model section; offspring coordinates
// and atom coordinates move with them.
json permute_model_json(const json& model, const std::vector<std::size_t>& order) {
    if (!model.contains("classes"))
        fail(errc::config, "permutation needs a multiclass model");
    const json& arr = model["classes"];
    const std::size_t k = arr.size();
    if (order.size() != k) fail(errc::config, "permutation must list every type exactly once");
    std::vector<bool> seen(k, false);
    for (std::size_t idx : order) {
        if (idx >= k || seen[idx]) fail(errc::config, "invalid type permutation");
        seen[idx] = true;
    }
    json out = model;
    json classes = json::array();
    for (std::size_t i = 0; i < k; ++i) {
        json cls = arr[order[i]];
        if (cls["kind"] == "independent") {
            json n = json::array();
            for (std::size_t j = 0; j < k; ++j) n.push_back(cls["n"][order[j]]);
            cls["n"] = std::move(n);
        } else if (cls["kind"] == "atomic_mrv") {
            for (auto& atom : cls["atoms"]) {
                json theta = json::array();
                theta.push_back(atom["theta"][0]);
                for (std::size_t j = 0; j < k; ++j) theta.push_back(atom["theta"][order[j] + 1]);
                atom["theta"] = std::move(theta);
            }
        } else {
            fail(errc::config, "permutation supports independent and atomic classes only");
        }
        classes.push_back(std::move(cls));
    }
    out["classes"] = std::move(classes);
    return out;
}

} // namespace

std::string reduced_config_json(const RunConfig& cfg) {
    if (cfg.model->type_count() < 2)
        fail(errc::config, "nothing to reduce: model has a single type");

    json parent_model = json::parse(cfg.model_json);
    std::shared_ptr<const MulticlassModel> parent = cfg.model;
    if (cfg.reduce_permutation.has_value()) {
        parent_model = permute_model_json(parent_model, *cfg.reduce_permutation);
        RunConfig permuted = cfg;  // rebuild the model in permuted order
        json probe = {{"model", parent_model}};
        permuted = load_config_text(probe.dump());
        parent = permuted.model;
    }

    MulticlassModel reduced = MulticlassModel::reduced_from(parent, cfg.sim.cap);

    json model = {
        {"kind", "reduced"},
        {"parent", parent_model},
        {"provenance", "fnv1a64:" + cfg.config_hash},
        {"declared", {{"M", matrix_to_json(reduced.mean_matrix())}, {"qbar", reduced.qbar()}}},
    };
    json sim = {
        {"kind", "progeny"},
        {"seed", cfg.sim.seed},
        {"replications", cfg.sim.replications},
        {"cap", cfg.sim.cap},
        {"workers", cfg.sim.workers},
        {"type", std::min<std::size_t>(cfg.task.type, reduced.type_count() - 1) + 1},
    };
    json validate = {
        {"grid", cfg.validate.grid},
        {"band", {cfg.validate.band_lo, cfg.validate.band_hi}},
        {"prediction_samples", cfg.validate.prediction_samples},
    };
    json doc = {{"model", model}, {"sim", sim}, {"validate", validate}};
    return doc.dump(2) + "\n";
}

} // namespace branchtail
