#pragma once

#include <string>
#include <vector>

#include "spde/config.hpp"
#include "spde/experiments.hpp"

namespace spde {

/// A rate table plus presentation metadata for plotting and the JSON sidecar.
struct NamedTable {
    std::string name;
    RateTable table;
    double reference_slope = 0.0;  ///< theoretical slope drawn as a dashed guide
    bool has_reference = false;
};

std::string row_flag_name(RowFlag f);
std::string format_g17(double v);

/// CSV with header h,err,se,n; values in round-trip precision.
void write_rate_csv(const std::string& path, const RateTable& table);

/// CSV with header t,init_id,phi_id,mean,se covering every series point.
void write_ergodicity_csv(const std::string& path, const ErgodicitySeries& series);

/// Log-log error plot: one colored series per table (excluded rows as hollow markers),
/// optional dashed reference slopes, legend with the fitted slopes.
void write_rate_svg(const std::string& path, const std::string& title,
                    const std::vector<NamedTable>& tables, const std::string& x_label);

/// Ensemble averages against time for one functional, one series per initial condition.
void write_ergodicity_svg(const std::string& path, const std::string& title,
                          const ErgodicitySeries& series, int phi_index,
                          const std::vector<std::string>& init_names);

/// Write every artifact of a rate-type command (<prefix>_<command>_<table>.csv, one SVG,
/// one JSON sidecar); returns the paths written.  All output is a pure function of the
/// config and results, so reruns produce byte-identical files.
std::vector<std::string> emit_rate_results(const RunConfig& cfg, const std::string& command,
                                           const std::vector<NamedTable>& tables,
                                           const SolveStats& stats, long long n_failed,
                                           const std::string& x_label);

std::vector<std::string> emit_ergodicity_results(const RunConfig& cfg,
                                                 const ErgodicitySeries& series,
                                                 const std::vector<std::string>& phi_names,
                                                 const std::vector<std::string>& init_names);

} // namespace spde
