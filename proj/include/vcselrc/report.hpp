#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vcselrc/experiment.hpp"

namespace vcselrc {

/// Plot-ready CSV files derived from a sweep:
///   fig_memory.csv  k,M_k,epsilon,detuning_nm,mode
///   fig_hr.csv      m,ber,epsilon,detuning_nm,mode
///   fig_dac.csv     m,rmse,epsilon,detuning_nm,mode
///   table_xor.csv   m,epsilon,detuning_nm,mode,ber,ber_trained_threshold,baseline
/// HR and DAC files carry the trivial-guess curve as rows with mode "trivial"
/// and empty epsilon/detuning cells. Failed points are skipped.
/// Returns the paths written.
std::vector<std::filesystem::path> emit_figures(const SweepResult &result,
                                                const std::filesystem::path &dir);

/// Short human-readable summary of a sweep, one line per point and task.
std::string summarize(const SweepResult &result);

} // namespace vcselrc
