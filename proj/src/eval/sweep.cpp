// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "eval/sweep.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "core/io.hpp"
#include "model/decode.hpp"

namespace prunelab {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw std::invalid_argument("bad double in report: " + s);
    return v;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

constexpr const char* kCsvHeader =
    "model_id,train_tokens,task_id,algorithm,scope,sparsity,accuracy,perplexity,"
    "agree_context_free,agree_gold,n_instances,status,error";

ordered_json row_to_json(const SweepRow& r) {
    ordered_json j;
    j["model_id"] = r.model_id;
    j["train_tokens"] = r.train_tokens;
    j["task_id"] = r.task_id;
    j["algorithm"] = r.algorithm;
    j["scope"] = r.scope;
    j["sparsity"] = r.sparsity;
    j["accuracy"] = r.accuracy;
    j["perplexity"] = r.perplexity;
    j["agree_context_free"] = r.agree_context_free;
    j["agree_gold"] = r.agree_gold;
    j["n_instances"] = r.n_instances;
    j["status"] = r.status;
    j["error"] = r.error;
    return j;
}

SweepRow row_from_json(const ordered_json& j) {
    SweepRow r;
    r.model_id = j.at("model_id").get<std::string>();
    r.train_tokens = j.at("train_tokens").get<long long>();
    r.task_id = j.at("task_id").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.scope = j.at("scope").get<std::string>();
    r.sparsity = j.at("sparsity").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    r.perplexity = j.at("perplexity").get<double>();
    r.agree_context_free = j.at("agree_context_free").get<double>();
    r.agree_gold = j.at("agree_gold").get<double>();
    r.n_instances = j.at("n_instances").get<long long>();
    r.status = j.at("status").get<std::string>();
    r.error = j.at("error").get<std::string>();
    return r;
}

}  // namespace

std::string SweepReport::to_csv() const {
    std::string out;
    out += "# prunelab sweep report\n";
    out += "# config_hash=" + config_hash + " seed=" + std::to_string(seed) + "\n";
    out += kCsvHeader;
    out += "\n";
    for (const SweepRow& r : rows) {
        out += csv_escape(r.model_id) + ",";
        out += std::to_string(r.train_tokens) + ",";
        out += csv_escape(r.task_id) + ",";
        out += r.algorithm + ",";
        out += r.scope + ",";
        out += format_double(r.sparsity) + ",";
        out += format_double(r.accuracy) + ",";
        out += format_double(r.perplexity) + ",";
        out += (r.agree_context_free < 0 ? std::string() : format_double(r.agree_context_free)) + ",";
        out += (r.agree_gold < 0 ? std::string() : format_double(r.agree_gold)) + ",";
        out += std::to_string(r.n_instances) + ",";
        out += r.status + ",";
        out += csv_escape(r.error) + "\n";
    }
    return out;
}

SweepReport SweepReport::from_csv(const std::string& text) {
    SweepReport report;
    std::istringstream in(text);
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::size_t h = line.find("config_hash=");
            if (h != std::string::npos) {
                const std::size_t end = line.find(' ', h);
                report.config_hash = line.substr(h + 12, end - h - 12);
                const std::size_t sp = line.find("seed=");
                if (sp != std::string::npos) report.seed = std::stoull(line.substr(sp + 5));
            }
            continue;
        }
        if (!saw_header) {
            if (line != kCsvHeader) throw std::invalid_argument("unexpected report header: " + line);
            saw_header = true;
            continue;
        }
        const std::vector<std::string> f = csv_split(line);
        if (f.size() != 13) throw std::invalid_argument("bad report row: " + line);
        SweepRow r;
        r.model_id = f[0];
        r.train_tokens = std::stoll(f[1]);
        r.task_id = f[2];
        r.algorithm = f[3];
        r.scope = f[4];
        r.sparsity = parse_double(f[5]);
        r.accuracy = parse_double(f[6]);
        r.perplexity = parse_double(f[7]);
        r.agree_context_free = f[8].empty() ? -1.0 : parse_double(f[8]);
        r.agree_gold = f[9].empty() ? -1.0 : parse_double(f[9]);
        r.n_instances = std::stoll(f[10]);
        r.status = f[11];
        r.error = f[12];
        report.rows.push_back(std::move(r));
    }
    return report;
}

PruneSpec default_prune_spec(PruneAlgorithm algorithm, double sparsity_fraction, PruneScope scope,
                             double damping) {
    PruneSpec spec;
    spec.algorithm = algorithm;
    spec.sparsity = sparsity_fraction;
    spec.scope = scope;
    spec.update_weights = algorithm == PruneAlgorithm::obs;
    spec.damping = damping;
    return spec;
}

namespace {

std::string key_name(const std::string& model_id, const std::string& task_id,
                     const std::string& alg, const std::string& scope, int s_pct) {
    return model_id + "__" + task_id + "__" + alg + "__" + scope + "__s" + std::to_string(s_pct);
}

void save_instance_log(const std::string& path, const std::vector<EvalInstanceRecord>& records,
                       bool with_context_free) {
    std::string out;
    for (const auto& rec : records) {
        ordered_json j;
        j["index"] = rec.index;
        j["prediction"] = rec.prediction;
        j["gold"] = rec.gold;
        j["correct"] = rec.correct;
        if (with_context_free) {
            j["context_free"] = rec.context_free;
            j["matches_context_free"] = rec.matches_context_free;
        }
        out += j.dump() + "\n";
    }
    write_file_atomic(path, out);
}

}  // namespace

SweepReport run_sweep(const Checkpoint& model, const Vocab& vocab,
                      const std::vector<Dataset>& tasks,
                      const std::vector<std::vector<int>>& calib, std::span<const int> heldout,
                      const SweepOptions& opt) {
    SweepReport report;
    report.config_hash = opt.config_hash;
    report.seed = opt.seed;

    const bool cache = !opt.cache_dir.empty();
    if (cache) {
        ensure_dir(opt.cache_dir + "/keys");
        ensure_dir(opt.cache_dir + "/instances");
        ensure_dir(opt.cache_dir + "/prune");
    }

    for (const PruneScope scope : opt.scopes) {
        for (const PruneAlgorithm alg : opt.algorithms) {
            const std::string alg_name = prune_algorithm_name(alg);
            const std::string scope_name = prune_scope_name(scope);
            for (const int s_pct : opt.sparsities_pct) {
                // Cached keys short-circuit the prune for this grid point.
                std::vector<int> missing;
                for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
                    const std::string key =
                        key_name(opt.model_id, tasks[ti].task_id, alg_name, scope_name, s_pct);
                    if (!cache || !file_exists(opt.cache_dir + "/keys/" + key + ".json")) {
                        missing.push_back(static_cast<int>(ti));
                    }
                }

                Checkpoint pruned;
                double ppl = 0.0;
                std::string prune_error;
                if (!missing.empty()) {
                    try {
                        PruneSpec spec = default_prune_spec(
                            alg, static_cast<double>(s_pct) / 100.0, scope, opt.damping);
                        auto [ck, prune_report] = prune_model(model, spec, calib);
                        pruned = std::move(ck);
                        ppl = perplexity(pruned, heldout);
                        if (cache) {
                            const std::string rp = opt.cache_dir + "/prune/" + opt.model_id + "__" +
                                                   alg_name + "__" + scope_name + "__s" +
                                                   std::to_string(s_pct) + ".json";
                            write_file_atomic(rp, prune_report.to_json());
                        }
                    } catch (const std::exception& e) {
                        prune_error = e.what();
                    }
                }

                for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
                    const Dataset& task = tasks[ti];
                    const std::string key =
                        key_name(opt.model_id, task.task_id, alg_name, scope_name, s_pct);
                    const std::string key_path = opt.cache_dir + "/keys/" + key + ".json";
                    if (cache && file_exists(key_path)) {
                        report.rows.push_back(
                            row_from_json(ordered_json::parse(read_text_file(key_path))));
                        continue;
                    }
                    SweepRow row;
                    row.model_id = opt.model_id;
                    row.train_tokens = model.trained_tokens;
                    row.task_id = task.task_id;
                    row.algorithm = alg_name;
                    row.scope = scope_name;
                    row.sparsity = s_pct;
                    if (!prune_error.empty()) {
                        row.status = "error";
                        row.error = prune_error;
                    } else {
                        try {
                            const bool icl = task.icl_kind;
                            const EvalResult res = eval_task(pruned, vocab, task, opt.limits, icl);
                            row.accuracy = res.accuracy;
                            row.perplexity = ppl;
                            row.n_instances = res.n_instances;
                            if (icl) {
                                const Agreement agr = agreement_analysis(res.records);
                                row.agree_context_free = agr.frac_context_free;
                                row.agree_gold = agr.frac_gold;
                            }
                            if (cache) {
                                save_instance_log(opt.cache_dir + "/instances/" + key + ".jsonl",
                                                  res.records, icl);
                            }
                        } catch (const std::exception& e) {
                            row.status = "error";
                            row.error = e.what();
                        }
                    }
                    if (cache && row.status == "ok") {
                        write_file_atomic(key_path, row_to_json(row).dump(2));
                    }
                    if (opt.verbose) {
                        std::printf("sweep %-14s %-12s s=%2d  acc=%s  status=%s\n",
                                    task.task_id.c_str(), alg_name.c_str(), s_pct,
                                    format_double(row.accuracy).c_str(), row.status.c_str());
                        std::fflush(stdout);
                    }
                    report.rows.push_back(std::move(row));
                }
            }
        }
    }
    return report;
}

AccuracyCurve extract_curve(const SweepReport& report, const std::string& task_id,
                            const std::string& algorithm, const std::string& scope) {
    AccuracyCurve curve;
    for (const SweepRow& r : report.rows) {
        if (r.status != "ok") continue;
        if (r.task_id == task_id && r.algorithm == algorithm && r.scope == scope) {
            curve.points.emplace_back(r.sparsity, r.accuracy);
        }
    }
    std::sort(curve.points.begin(), curve.points.end());
    return curve;
}

}  // namespace prunelab
