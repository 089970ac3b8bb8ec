#pragma once

#include <filesystem>
#include <vector>

#include "c3bv/dynamics.hpp"
#include "c3bv/harness.hpp"

namespace c3bv {

/// Writes cells.csv, aggregates.csv, optima.json, plot_<mode>.csv per mode and
/// welfare_curve.svg into `out_dir`.
void export_results(const SweepResult& result, const std::filesystem::path& out_dir);

std::vector<CellRecord> read_cells_csv(const std::filesystem::path& path);

/// step,creator_id,utility,welfare
void write_trace_csv(const DynamicsTrace& trace, const std::filesystem::path& path);

/// One polyline per mode: objective mean against lambda.
std::string render_svg(const SweepResult& result);

}  // namespace c3bv
