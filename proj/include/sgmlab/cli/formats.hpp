#pragma once

#include "sgmlab/bias_estimator.hpp"
#include "sgmlab/diffusion_train.hpp"
#include "sgmlab/geometry_metrics.hpp"
#include "sgmlab/synth_data.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sgmlab::cli {

inline constexpr int kDatasetSchemaVersion = 1;

// One JSON document per line, one molecule per document.
nlohmann::json conformer_set_to_json(const ConformerSet& set);
ConformerSet conformer_set_from_json(const nlohmann::json& doc);
std::string dataset_to_jsonl(const std::vector<ConformerSet>& sets);
std::vector<ConformerSet> dataset_from_jsonl(const std::string& text, const std::string& origin);
std::vector<ConformerSet> read_dataset(const std::filesystem::path& path);

nlohmann::json template_to_json(const MoleculeTemplate& t);
MoleculeTemplate template_from_json(const nlohmann::json& j);

// CSV reports. Each starts with "# manifest: <digest>".
std::string bias_csv(const BiasReport& report, const std::string& manifest_digest);
std::string histogram_csv(const Histogram& h, const std::string& manifest_digest);
std::string eval_csv(const EvalReport& report, const std::string& manifest_digest);
std::string train_log_csv(const TrainLog& log, const std::string& manifest_digest);

// Minimal CSV reader for the reports above: skips '#' lines, returns the
// header and the rows as strings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};
CsvTable parse_csv(const std::string& text);

}  // namespace sgmlab::cli
