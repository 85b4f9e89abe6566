#pragma once

#include <string>
#include <vector>

#include "evaluation/evaluation.hpp"
#include "training/training.hpp"
#include <json.hpp>

namespace princ {

nlohmann::json to_json(const TrainConfig& cfg);
// Missing keys keep the values already in cfg; unknown keys are rejected.
void merge_json(TrainConfig& cfg, const nlohmann::json& j);

// One JSON object per epoch, then a closing {"checksum": ...} record.
std::string train_report_records(const TrainReport& report);
void write_train_report(const std::string& path, const TrainReport& report);

// A summary record, one record per intent, then one per episode (eps only).
std::string eval_report_records(const EvalReport& report);
void write_eval_report(const std::string& path, const EvalReport& report);
std::string format_eval_table(const EvalReport& report);

std::string format_forgetting_table(const std::vector<ForgettingRow>& rows);

void write_text(const std::string& path, const std::string& content);

}  // namespace princ
