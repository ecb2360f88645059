#pragma once

#include <string>
#include <vector>

#include "idleq/config.hpp"
#include "idleq/csv.hpp"
#include "idleq/des_engine.hpp"
#include "idleq/fluid_control.hpp"

namespace idleq {

struct SweepRow {
  int n = 0;
  std::string policy;
  SimEstimate estimate;
  double gap = 0.0;  // estimate.total.mean - fluid cost
};

struct SweepResult {
  FluidDesign design;
  std::vector<SweepRow> rows;  // n_values order, then policy order
};

// Every (N, policy, replication) triple is an independent task; results are
// reduced in key order so the table does not depend on `parallel`.
SweepResult convergence_sweep(const ExperimentConfig& config, bool parallel = true);

// Columns shared by `simulate` and `sweep`.
std::vector<std::string> estimate_columns();
std::vector<CsvCell> estimate_cells(const SimEstimate& e);

CsvTable simulate_table(const std::vector<SimEstimate>& estimates);
CsvTable sweep_table(const SweepResult& result);
// One row: b*, p*, fluid cost, regime and the cost components at (b*, p*).
CsvTable design_table(const ExperimentConfig& config, const FluidDesign& design);

}  // namespace idleq
