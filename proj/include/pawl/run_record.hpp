#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pawl/bin_partition.hpp"

namespace pawl {

struct SampleRow {
  std::int64_t iteration = 0;
  int chain = 0;
  int bin = 0;
  double log_density = 0.0;
  double xi = 0.0;
  std::vector<double> state;
};

// Time series and summaries produced by one sampler run. Traces are indexed
// by iteration (strictly increasing); samples are thinned.
struct RunRecord {
  std::string algorithm;
  std::string target;
  std::uint64_t seed = 0;
  int n_chains = 0;
  std::int64_t iterations = 0;

  std::vector<std::int64_t> trace_iterations;
  std::vector<std::vector<double>> theta_trace;  // log theta, per trace iteration
  std::vector<std::vector<double>> nu_trace;

  std::vector<BoundaryEvent> boundary_events;
  std::vector<double> acceptance_trace;  // ensemble fraction, per iteration
  std::vector<double> sigma_trace;       // empty when no scale adaptation

  std::vector<SampleRow> samples;
  std::vector<std::string> state_labels;

  std::vector<std::int64_t> fh_times;
  std::vector<double> fh_deviation;  // max|nu-phi| immediately before reset

  double xi_min = std::numeric_limits<double>::infinity();
  double xi_max = -std::numeric_limits<double>::infinity();

  std::int64_t density_evaluations = 0;   // one per proposed move
  std::int64_t initial_evaluations = 0;   // cache priming, reported separately
  std::int64_t nonfinite_proposals = 0;
  double max_theta_norm_error = 0.0;

  std::vector<double> final_log_theta;
  std::vector<double> final_phi;
  std::vector<double> final_inner_boundaries;
  double final_e_min = 0.0;
  int final_stage = 0;  // flat-histogram count k

  double xi_range_width() const { return xi_max - xi_min; }
  std::int64_t split_count() const {
    std::int64_t n = 0;
    for (const auto& e : boundary_events)
      if (e.kind == BoundaryEvent::Kind::split) ++n;
    return n;
  }
  BinPartition final_partition() const {
    return BinPartition(final_inner_boundaries, final_e_min);
  }
};

}  // namespace pawl
