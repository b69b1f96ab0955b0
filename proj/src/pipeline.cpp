#include "branchtail/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "branchtail/asymptotics.hpp"
#include "branchtail/error.hpp"

namespace branchtail {

namespace {

std::string fixed6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string vec6(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ", ";
        out += fixed6(v[i]);
    }
    return out + "]";
}

std::string matrix6(const Matrix& m, const std::string& indent) {
    std::string out;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out += indent + "[";
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j > 0) out += ", ";
            out += fixed6(m(i, j));
        }
        out += "]\n";
    }
    return out;
}

std::string kind_name(SimKind kind) {
    switch (kind) {
        case SimKind::progeny: return "progeny";
        case SimKind::tau: return "tau";
        case SimKind::weight: return "weight";
    }
    return "progeny";
}

// Tail constants c_i(1, rbar_1..rbar_K) and d_i for a model with tail
// metadata; zero-tail types contribute c_i = 0 and are flagged by caller.
TailSolution model_tail_solution(const MulticlassModel& model, const std::vector<double>& rbar) {
    const std::size_t k = model.type_count();
    std::vector<double> coeff(k + 1, 0.0);
    coeff[0] = 1.0;
    for (std::size_t i = 0; i < k; ++i) coeff[i + 1] = rbar[i];
    std::vector<double> c(k, 0.0);
    const double alpha = model.reference()->alpha;
    for (std::size_t i = 0; i < k; ++i) {
        const AngularMeasure* mu = model.angular(i);
        if (mu == nullptr || model.tail_multiplier(i) <= 0.0) continue;
        c[i] = angular_tail_constant(model.tail_multiplier(i), *mu, coeff, alpha);
    }
    return solve_tail_constants(model.mean_matrix(), std::move(c));
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::io, "cannot open output file: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) fail(errc::io, "cannot write output file: " + path);
}

} // namespace

std::string analyze_report(const RunConfig& cfg) {
    const MulticlassModel& model = *cfg.model;
    const std::size_t k = model.type_count();

    MeanSolution means = solve_means(model.mean_matrix(), model.qbar());

    std::string out;
    out += "classes: " + std::to_string(k) + "\n";
    out += "qbar: " + vec6(model.qbar()) + "\n";
    out += "M:\n" + matrix6(model.mean_matrix(), "  ");
    out += "rho: " + fixed6(model.rho()) + "\n";
    out += "rbar: " + vec6(means.rbar) + "\n";
    if (k == 1) {
        const double nbar = model.mean_matrix()(0, 0);
        out += "nbar: " + fixed6(nbar) + "\n";
        out += "prefactor: " + fixed6(1.0 / (1.0 - nbar)) + "\n";
    }

    if (model.reference().has_value()) {
        const RVTail& ref = *model.reference();
        out += "reference tail: alpha=" + fixed6(ref.alpha) + " xm=" + fixed6(ref.xm) + "\n";
        std::vector<double> b(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) b[i] = model.tail_multiplier(i);
        out += "b: " + vec6(b) + "\n";
        TailSolution tails = model_tail_solution(model, means.rbar);
        out += "c: " + vec6(tails.c) + "\n";
        out += "d: " + vec6(tails.d) + "\n";
        for (std::size_t i = 0; i < k; ++i)
            if (model.tail_multiplier(i) <= 0.0)
                out += "note: type " + std::to_string(i + 1) + " has zero tail multiplier (c=0)\n";
        if (k == 1) {
            const double nbar = model.mean_matrix()(0, 0);
            out += "predicted tail constant: " + fixed6(tails.c[0] / (1.0 - nbar)) + "\n";
        }
    } else {
        out += "reference tail: none (no regularly varying component declared)\n";
    }

    if (k >= 2) {
        out += "reduction chain:\n";
        Matrix m = model.mean_matrix();
        std::vector<double> qb = model.qbar();
        while (m.rows() >= 2) {
            ReducedMeans next = reduce_means(m, qb);
            m = next.m;
            qb = next.qbar;
            out += "  K=" + std::to_string(m.rows()) + ":\n";
            out += "  M:\n" + matrix6(m, "    ");
            out += "  qbar: " + vec6(qb) + "\n";
        }
        const double m_scalar = m(0, 0);
        out += "  scalar: m = " + fixed6(m_scalar) + ", qbar = " + fixed6(qb[0]) +
               ", rbar = " + fixed6(qb[0] / (1.0 - m_scalar)) + "\n";
    }
    return out;
}

SimulateSummary simulate_to_files(const RunConfig& cfg, const std::string& out_path) {
    RunResult result = run_replications(*cfg.model, cfg.task, cfg.sim);

    std::string body;
    body.reserve(result.values.size() * 12);
    char buf[40];
    for (double v : result.values) {
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        body.append(buf, res.ptr);
        body.push_back('\n');
    }
    write_text_file(out_path, body);

    nlohmann::json meta = {
        {"cap", cfg.sim.cap},
        {"kind", kind_name(cfg.task.kind)},
        {"model_hash", cfg.model_hash},
        {"replications", cfg.sim.replications},
        {"seed", cfg.sim.seed},
        {"truncated", result.truncated},
        {"type", cfg.task.type + 1},
        {"workers", cfg.sim.workers},
    };
    if (cfg.task.kind == SimKind::weight) {
        meta["k0"] = cfg.task.k0;
        meta["k1"] = cfg.task.k1;
    }
    SimulateSummary summary;
    summary.replications = cfg.sim.replications;
    summary.truncated = result.truncated;
    summary.samples_path = out_path;
    summary.sidecar_path = out_path + ".meta.json";
    write_text_file(summary.sidecar_path, meta.dump(2) + "\n");
    return summary;
}

ValidateOutcome run_validation(const RunConfig& cfg, const std::string& report_path) {
    const MulticlassModel& model = *cfg.model;
    const std::size_t k = model.type_count();
    ValidateOutcome out;
    out.band_ok = true;

    SimTask task;
    task.kind = SimKind::progeny;

    auto add_rows = [&](std::size_t type, const std::function<double(double)>& predicted) {
        task.type = type;
        RunResult run = run_replications(model, task, cfg.sim);
        TailReport report = ratio_diagnostic(std::move(run.values), predicted, cfg.validate.grid);
        for (std::size_t g = 0; g < report.rows.size(); ++g) {
            const TailRow& row = report.rows[g];
            bool in_band = !row.flagged && row.ratio >= cfg.validate.band_lo &&
                           row.ratio <= cfg.validate.band_hi;
            if (!in_band) out.band_ok = false;
            char line[192];
            if (row.flagged)
                std::snprintf(line, sizeof line,
                              "type %zu x=%.6g empirical=%.3e predicted=0 (flagged: no tail)\n",
                              type + 1, row.x, row.empirical);
            else
                std::snprintf(line, sizeof line,
                              "type %zu x=%.6g empirical=%.3e predicted=%.3e ratio=%.4f %s\n",
                              type + 1, row.x, row.empirical, row.predicted, row.ratio,
                              in_band ? "(in band)" : "(OUT OF BAND)");
            out.summary += line;
            out.report.rows.push_back(row);
        }
        if (run.truncated > 0)
            out.summary += "type " + std::to_string(type + 1) + " truncated replications: " +
                           std::to_string(run.truncated) + "\n";
    };

    if (const JointModel* pair = model.single_pair()) {
        auto predicted = [&](double x) {
            return predicted_tail_single(*pair, x, cfg.validate.prediction_samples,
                                         cfg.prediction_seed(), cfg.validate.rbar_override);
        };
        add_rows(0, predicted);
    } else if (model.reference().has_value()) {
        MeanSolution means = solve_means(model.mean_matrix(), model.qbar());
        TailSolution tails = model_tail_solution(model, means.rbar);
        const RVTail ref = *model.reference();
        for (std::size_t t = 0; t < k; ++t) {
            const double dt = tails.d[t];
            auto predicted = [dt, ref](double x) {
                return std::min(1.0, dt * std::pow(ref.xm / std::max(ref.xm, x), ref.alpha));
            };
            add_rows(t, predicted);
        }
    } else {
        // No tail metadata at all: every row is flagged.
        for (std::size_t t = 0; t < k; ++t) add_rows(t, [](double) { return 0.0; });
    }

    std::sort(out.report.rows.begin(), out.report.rows.end(),
              [](const TailRow& a, const TailRow& b) { return a.x < b.x; });

    char tail_line[96];
    std::snprintf(tail_line, sizeof tail_line, "band: [%.4f, %.4f]\nresult: %s\n",
                  cfg.validate.band_lo, cfg.validate.band_hi, out.band_ok ? "PASS" : "FAIL");
    out.summary += tail_line;

    if (!report_path.empty()) write_text_file(report_path, out.report.to_csv());
    return out;
}

ReduceSummary reduce_to_file(const RunConfig& cfg, const std::string& out_path) {
    std::string text = reduced_config_json(cfg);
    write_text_file(out_path, text);
    ReduceSummary summary;
    summary.parent_types = cfg.model->type_count();
    summary.out_path = out_path;
    return summary;
}

} // namespace branchtail
