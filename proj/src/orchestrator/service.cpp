/*
   Copyright 2026 The Blockbox Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <blockbox/orchestrator/service.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include <blockbox/common/errors.hpp>
#include <blockbox/orchestrator/multiprocess.hpp>
#include <blockbox/orchestrator/simulation.hpp>

namespace blockbox::orchestrator {

namespace fs = std::filesystem;

namespace {

    std::int64_t now_ms() {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch()).count();
    }

    template <typename T>
    nlohmann::json or_null(const std::optional<T>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    }

    void write_file(const fs::path& path, const std::string& text) {
        std::ofstream out{path, std::ios::binary | std::ios::trunc};
        out << text;
        if (!out) raise(ErrorCode::io, "cannot write " + path.string());
    }

    std::string read_file(const fs::path& path) {
        std::ifstream in{path, std::ios::binary};
        if (!in) raise(ErrorCode::not_found, "missing " + path.string());
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    nlohmann::json parse_file(const fs::path& path) {
        try {
            return nlohmann::json::parse(read_file(path));
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::invalid_input, path.string() + ": " + e.what());
        }
    }

    std::vector<std::string> node_names(std::uint32_t n) {
        std::vector<std::string> out;
        for (std::uint32_t i = 0; i < n; ++i) out.push_back(node_name(i));
        return out;
    }

    std::vector<node::NodeLog> read_logs(const fs::path& directory, const ExperimentConfig& config) {
        std::vector<node::NodeLog> logs;
        for (const auto& name : node_names(config.n)) {
            const auto path = directory / "logs" / (name + ".jsonl");
            if (fs::exists(path)) logs.push_back(node::read_log_file(path.string()));
        }
        return logs;
    }

}  // namespace

std::string_view to_string(RunStatus status) noexcept {
    switch (status) {
        case RunStatus::pending: return "pending";
        case RunStatus::running: return "running";
        case RunStatus::completed: return "completed";
        case RunStatus::aborted: return "aborted";
    }
    return "unknown";
}

RunStatus run_status_from_string(std::string_view text) {
    for (const auto s : {RunStatus::pending, RunStatus::running, RunStatus::completed, RunStatus::aborted}) {
        if (to_string(s) == text) return s;
    }
    raise(ErrorCode::invalid_input, "unknown run status '" + std::string{text} + "'");
}

nlohmann::json summary_json(const RunRecord& r) {
    return {{"id", r.id},
            {"status", to_string(r.status)},
            {"error", or_null(r.error)},
            {"config", to_json(r.config)},
            {"started_at_ms", or_null(r.started_at_ms)},
            {"finished_at_ms", or_null(r.finished_at_ms)},
            {"consensus", r.consensus},
            {"consensus_at_stop", r.consensus_at_stop},
            {"settle_rounds", r.settle_rounds},
            {"mean_interval_ms", or_null(r.mean_interval_ms)},
            {"metrics", r.metrics ? metrics::to_json(*r.metrics) : nlohmann::json(nullptr)}};
}

std::string metrics_file_text(const metrics::MetricsReport& report) { return metrics::to_json(report).dump(2) + "\n"; }

void export_run(const RunRecord& r, const fs::path& directory) {
    if (r.status != RunStatus::completed && r.status != RunStatus::aborted) {
        raise(ErrorCode::rejected, "run " + r.id + " is " + std::string{to_string(r.status)} + "; only finished runs export");
    }
    std::error_code ec;
    fs::create_directories(directory / "logs", ec);
    if (ec) raise(ErrorCode::io, "cannot create " + directory.string() + ": " + ec.message());
    write_file(directory / "config.json", to_json(r.config).dump(2) + "\n");
    auto run = summary_json(r);
    run.erase("metrics");
    run.erase("config");
    write_file(directory / "run.json", run.dump(2) + "\n");
    for (const auto& log : r.logs) node::write_log_file((directory / "logs" / (log.header.node_id + ".jsonl")).string(), log);
    const auto metrics_path = directory / "metrics.json";
    if (r.metrics) {
        write_file(metrics_path, metrics_file_text(*r.metrics));
    } else {
        fs::remove(metrics_path, ec);
    }
}

RunRecord import_run(const fs::path& directory) {
    if (!fs::is_directory(directory)) raise(ErrorCode::not_found, "no export at " + directory.string());
    RunRecord r;
    r.config = config_from_json(parse_file(directory / "config.json"));
    r.logs = read_logs(directory, r.config);
    if (fs::exists(directory / "metrics.json")) r.metrics = metrics::report_from_json(parse_file(directory / "metrics.json"));
    r.status = r.metrics ? RunStatus::completed : RunStatus::aborted;
    if (fs::exists(directory / "run.json")) {
        const auto run = parse_file(directory / "run.json");
        try {
            r.id = run.value("id", std::string{});
            r.status = run_status_from_string(run.value("status", std::string{to_string(r.status)}));
            if (run.contains("error") && !run.at("error").is_null()) r.error = run.at("error").get<std::string>();
            if (run.contains("started_at_ms") && !run.at("started_at_ms").is_null()) r.started_at_ms = run.at("started_at_ms").get<std::int64_t>();
            if (run.contains("finished_at_ms") && !run.at("finished_at_ms").is_null()) r.finished_at_ms = run.at("finished_at_ms").get<std::int64_t>();
            r.consensus = run.value("consensus", false);
            r.consensus_at_stop = run.value("consensus_at_stop", false);
            r.settle_rounds = run.value("settle_rounds", 0u);
            if (run.contains("mean_interval_ms") && !run.at("mean_interval_ms").is_null()) r.mean_interval_ms = run.at("mean_interval_ms").get<double>();
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::invalid_input, "run.json: " + std::string{e.what()});
        }
    }
    if ((r.status == RunStatus::completed) != r.metrics.has_value()) {
        raise(ErrorCode::invalid_input, "export says " + std::string{to_string(r.status)} + " but metrics.json is " +
                                            (r.metrics ? "present" : "missing"));
    }
    return r;
}

metrics::MetricsReport recompute_metrics(const fs::path& directory) {
    const auto config = config_from_json(parse_file(directory / "config.json"));
    return metrics::compute_metrics(read_logs(directory, config), node_names(config.n));
}

Orchestrator::Orchestrator(fs::path data_dir) : data_dir_{std::move(data_dir)} {}

Orchestrator::~Orchestrator() {
    std::map<std::string, std::shared_ptr<Run>> runs;
    {
        std::lock_guard lock{mutex_};
        runs = runs_;
    }
    for (auto& [id, run] : runs) run->cancel = true;
    for (auto& [id, run] : runs) {
        if (run->thread.joinable()) run->thread.join();
    }
}

std::shared_ptr<Orchestrator::Run> Orchestrator::find(const std::string& id) const {
    std::lock_guard lock{mutex_};
    const auto it = runs_.find(id);
    if (it == runs_.end()) raise(ErrorCode::not_found, "no run '" + id + "'");
    return it->second;
}

std::string Orchestrator::add(RunRecord record) {
    auto run = std::make_shared<Run>();
    std::lock_guard lock{mutex_};
    char id[32];
    std::snprintf(id, sizeof id, "run-%04llu", static_cast<unsigned long long>(next_id_++));
    record.id = id;
    run->record = std::move(record);
    runs_[id] = run;
    return id;
}

std::string Orchestrator::create(const ExperimentConfig& config) {
    if (const auto errors = validate(config); !errors.empty()) {
        std::string joined;
        for (const auto& e : errors) joined += (joined.empty() ? "" : "; ") + e;
        raise(ErrorCode::invalid_input, joined);
    }
    RunRecord r;
    r.config = config;
    return add(std::move(r));
}

void Orchestrator::start(const std::string& id) {
    const auto run = find(id);
    std::lock_guard lock{run->mutex};
    if (run->record.status != RunStatus::pending) {
        raise(ErrorCode::rejected, "run " + id + " is " + std::string{to_string(run->record.status)});
    }
    run->record.status = RunStatus::running;
    run->record.started_at_ms = now_ms();
    run->thread = std::thread{[this, run] { execute(run); }};
    run->changed.notify_all();
}

std::string Orchestrator::start_run(const ExperimentConfig& config) {
    const auto id = create(config);
    start(id);
    return id;
}

void Orchestrator::stop(const std::string& id) {
    const auto run = find(id);
    std::lock_guard lock{run->mutex};
    if (run->record.status == RunStatus::pending) {
        run->record.status = RunStatus::aborted;
        run->record.finished_at_ms = now_ms();
        run->record.error = "stopped before start";
        run->changed.notify_all();
    } else if (run->record.status == RunStatus::running) {
        run->cancel = true;
    }
}

void Orchestrator::execute(const std::shared_ptr<Run>& run) {
    ExperimentConfig config;
    std::string id;
    {
        std::lock_guard lock{run->mutex};
        config = run->record.config;
        id = run->record.id;
    }
    RunControl control;
    control.cancel = &run->cancel;
    control.on_snapshot = [run](const Snapshot& s) {
        std::lock_guard lock{run->mutex};
        run->snapshot = s;
        ++run->snapshot_seq;
        run->changed.notify_all();
    };

    RunRecord done;
    try {
        const auto work = data_dir_.empty() ? fs::temp_directory_path() / ("blockbox-" + id + "-" + std::to_string(now_ms()))
                                            : data_dir_ / "runs" / id / "work";
        const auto outcome = config.simulated() ? run_simulation(config, control) : run_multiprocess(config, work, control);
        done.logs = outcome.logs;
        done.consensus = outcome.consensus;
        done.consensus_at_stop = outcome.consensus_at_stop;
        done.settle_rounds = outcome.settle_rounds;
        if (outcome.failure) {
            done.status = RunStatus::aborted;
            done.error = outcome.failure;
        } else if (outcome.cancelled) {
            done.status = RunStatus::aborted;
        } else {
            done.metrics = metrics::compute_metrics(outcome.logs, node_names(config.n));
            done.mean_interval_ms = mean_mainchain_interval_ms(outcome.logs, outcome.mining_started);
            done.status = RunStatus::completed;
        }
    } catch (const std::exception& e) {
        done.status = RunStatus::aborted;
        done.error = e.what();
        done.metrics.reset();
    }
    spdlog::info("{} {}{}", id, to_string(done.status), done.error ? ": " + *done.error : "");

    std::lock_guard lock{run->mutex};
    auto& r = run->record;
    r.status = done.status;
    r.error = done.error;
    r.logs = std::move(done.logs);
    r.metrics = std::move(done.metrics);
    r.consensus = done.consensus;
    r.consensus_at_stop = done.consensus_at_stop;
    r.settle_rounds = done.settle_rounds;
    r.mean_interval_ms = done.mean_interval_ms;
    r.finished_at_ms = now_ms();
    if (!data_dir_.empty()) {
        try {
            export_run(r, data_dir_ / "runs" / id);
        } catch (const Error& e) {
            spdlog::error("{}: could not persist: {}", id, e.what());
        }
    }
    run->changed.notify_all();
}

RunRecord Orchestrator::record(const std::string& id) const {
    const auto run = find(id);
    std::lock_guard lock{run->mutex};
    return run->record;
}

std::vector<std::string> Orchestrator::ids() const {
    std::lock_guard lock{mutex_};
    std::vector<std::string> out;
    for (const auto& [id, run] : runs_) out.push_back(id);
    return out;
}

std::optional<std::pair<std::uint64_t, Snapshot>> Orchestrator::latest(const std::string& id) const {
    const auto run = find(id);
    std::lock_guard lock{run->mutex};
    if (!run->snapshot) return std::nullopt;
    return std::pair{run->snapshot_seq, *run->snapshot};
}

std::optional<std::pair<std::uint64_t, Snapshot>> Orchestrator::next_snapshot(const std::string& id, std::uint64_t after,
                                                                               std::chrono::milliseconds timeout) const {
    const auto run = find(id);
    std::unique_lock lock{run->mutex};
    const auto finished = [&] {
        return run->record.status == RunStatus::completed || run->record.status == RunStatus::aborted;
    };
    run->changed.wait_for(lock, timeout, [&] { return run->snapshot_seq > after || finished(); });
    if (run->snapshot_seq > after && run->snapshot) return std::pair{run->snapshot_seq, *run->snapshot};
    return std::nullopt;
}

RunStatus Orchestrator::wait(const std::string& id, std::chrono::milliseconds timeout) const {
    const auto run = find(id);
    std::unique_lock lock{run->mutex};
    run->changed.wait_for(lock, timeout, [&] {
        return run->record.status == RunStatus::completed || run->record.status == RunStatus::aborted;
    });
    return run->record.status;
}

void Orchestrator::export_to(const std::string& id, const fs::path& directory) const {
    const auto run = find(id);
    std::lock_guard lock{run->mutex};
    export_run(run->record, directory);
}

std::string Orchestrator::import_from(const fs::path& directory) {
    auto record = import_run(directory);
    return add(std::move(record));
}

}  // namespace blockbox::orchestrator
