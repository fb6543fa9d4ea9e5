#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "newsgraph/config.hpp"
#include "newsgraph/data/prepared.hpp"
#include "newsgraph/model/gnn.hpp"

namespace newsgraph::app {

// Output file layout under paths.output_dir.
std::filesystem::path prepared_path(const RunConfig& config);
std::filesystem::path checkpoint_path(const RunConfig& config, model::ModelKind kind, labels::TargetMode mode);
std::filesystem::path history_path(const RunConfig& config, model::ModelKind kind, labels::TargetMode mode);
std::filesystem::path report_path(const RunConfig& config, model::ModelKind kind, labels::TargetMode mode,
                                  bool delimited);

// Freshly initialised model for the dataset (article width, table keys).
model::Model make_model(const RunConfig& config, const data::PreparedDataset& dataset, model::ModelKind kind);

void command_synth(const RunConfig& config, std::ostream& out);
void command_prepare(const RunConfig& config, std::ostream& out);
void command_train(const RunConfig& config, model::ModelKind kind, std::ostream& out);
void command_eval(const RunConfig& config, model::ModelKind kind, std::ostream& out);
void command_report(const RunConfig& config, model::ModelKind kind, bool per_company, bool delimited,
                    std::ostream& out);

// Parses the command line, runs the command and maps errors onto exit codes:
// 0 success, 1 usage or config, 2 data, 3 numerical.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace newsgraph::app
