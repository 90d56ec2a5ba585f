#pragma once

#include "drcl/cycle/report.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace drcl::cli {

/// Per-epoch CSV columns, in file order.
inline constexpr std::string_view kEpochCsvHeader =
    "epoch,proto_source,k,loss_gcn,loss_gcn_scaled,loss_tsmm,loss_total,final_staged_acc,"
    "dbi,di,q,nmi,acc,f1,ari,agreement";

inline constexpr std::string_view kSupervisionCsvHeader =
    "supervision,fraction,labels_used,acc,f1,ari";

/// Indented JSON with a fixed key order. Absent values are null.
std::string emit_json(const cycle::RunReport& report);
cycle::RunReport parse_run_report(std::string_view json);

std::string emit_json(const cycle::SupervisionReport& report);
cycle::SupervisionReport parse_supervision_report(std::string_view json);

/// One row per epoch under kEpochCsvHeader. Reports without epochs (the
/// k-means ablation) get a single row labeled "final".
std::string emit_csv(const cycle::RunReport& report);
std::string emit_csv(const cycle::SupervisionReport& report);

/// Throws ValidationError naming the path when it cannot be written.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace drcl::cli
