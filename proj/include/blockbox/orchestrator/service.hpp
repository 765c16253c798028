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

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include <blockbox/metrics/metrics.hpp>
#include <blockbox/node/events.hpp>
#include <blockbox/orchestrator/config.hpp>
#include <blockbox/orchestrator/snapshot.hpp>

namespace blockbox::orchestrator {

enum class RunStatus { pending, running, completed, aborted };

[[nodiscard]] std::string_view to_string(RunStatus status) noexcept;
//! Throws invalid_input.
[[nodiscard]] RunStatus run_status_from_string(std::string_view text);

//! One experiment: its config, what happened, and (only when completed) its metrics.
struct RunRecord {
    std::string id;
    ExperimentConfig config;
    RunStatus status{RunStatus::pending};
    //! Why the run was aborted, when it was not a stop request.
    std::optional<std::string> error;
    //! Wall-clock times, milliseconds since the Unix epoch.
    std::optional<std::int64_t> started_at_ms;
    std::optional<std::int64_t> finished_at_ms;
    bool consensus{false};
    bool consensus_at_stop{false};
    std::uint32_t settle_rounds{0};
    std::optional<double> mean_interval_ms;
    std::vector<node::NodeLog> logs;
    std::optional<metrics::MetricsReport> metrics;
};

//! Everything except logs: {"id", "status", "error", "config", "started_at_ms",
//! "finished_at_ms", "consensus", "consensus_at_stop", "settle_rounds", "mean_interval_ms",
//! "metrics"}. Absent values are null.
[[nodiscard]] nlohmann::json summary_json(const RunRecord& record);

/**
 * Writes config.json, run.json, logs/<node>.jsonl and, when the run completed, metrics.json.
 * Throws rejected unless the run is completed or aborted, io on write failure.
 */
void export_run(const RunRecord& record, const std::filesystem::path& directory);
//! Reads an exported directory back. Throws not_found, invalid_input or log_corruption.
[[nodiscard]] RunRecord import_run(const std::filesystem::path& directory);
//! Metrics recomputed from an export's config and logs alone.
[[nodiscard]] metrics::MetricsReport recompute_metrics(const std::filesystem::path& directory);
//! The exact metrics.json text export_run writes for a report.
[[nodiscard]] std::string metrics_file_text(const metrics::MetricsReport& report);

/**
 * The run registry behind the CLI and the HTTP API.
 *
 * Each started run executes on its own thread (simulated or multiprocess per its config) and
 * publishes snapshots; readers take copies under the run's lock. A run that finishes is
 * written to <data_dir>/runs/<id>/ when a data directory was given.
 */
class Orchestrator {
  public:
    explicit Orchestrator(std::filesystem::path data_dir = {});
    ~Orchestrator();

    Orchestrator(const Orchestrator&) = delete;
    Orchestrator& operator=(const Orchestrator&) = delete;

    //! Registers a pending run. Throws invalid_input listing every validation problem.
    std::string create(const ExperimentConfig& config);
    //! pending -> running. Throws not_found, or rejected when the run is not pending.
    void start(const std::string& id);
    //! create + start.
    std::string start_run(const ExperimentConfig& config);
    //! Ends a run early: running runs abort once their thread notices, pending ones at once.
    //! Finished runs are left alone. Throws not_found.
    void stop(const std::string& id);

    //! Throws not_found.
    [[nodiscard]] RunRecord record(const std::string& id) const;
    [[nodiscard]] std::vector<std::string> ids() const;
    //! Latest snapshot and its sequence number (starting at 1); nothing before the first one.
    [[nodiscard]] std::optional<std::pair<std::uint64_t, Snapshot>> latest(const std::string& id) const;
    //! Waits until a snapshot newer than `after` exists or the run finishes or timeout passes.
    [[nodiscard]] std::optional<std::pair<std::uint64_t, Snapshot>> next_snapshot(const std::string& id, std::uint64_t after,
                                                                                 std::chrono::milliseconds timeout) const;
    //! Blocks until the run is completed or aborted, or timeout passes; returns its status.
    RunStatus wait(const std::string& id, std::chrono::milliseconds timeout) const;

    //! Throws not_found or rejected (still running).
    void export_to(const std::string& id, const std::filesystem::path& directory) const;
    //! Registers an exported run under a fresh id.
    std::string import_from(const std::filesystem::path& directory);

  private:
    struct Run {
        mutable std::mutex mutex;
        mutable std::condition_variable changed;
        RunRecord record;
        std::optional<Snapshot> snapshot;
        std::uint64_t snapshot_seq{0};
        std::atomic<bool> cancel{false};
        std::thread thread;
    };

    [[nodiscard]] std::shared_ptr<Run> find(const std::string& id) const;
    std::string add(RunRecord record);
    void execute(const std::shared_ptr<Run>& run);

    std::filesystem::path data_dir_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Run>> runs_;
    std::uint64_t next_id_{1};
};

}  // namespace blockbox::orchestrator
