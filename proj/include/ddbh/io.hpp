#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddbh/dynamics.hpp"
#include "ddbh/oracle.hpp"
#include "ddbh/sweep.hpp"
#include "ddbh/topology.hpp"

namespace ddbh {

/// Shortest round-trip decimal form, independent of the global locale.
std::string format_number(double v);

// CSV writers: header row, comma separator, '.' decimal, LF line endings.
// Site indices j are 1-based.

/// t,j,re_alpha,im_alpha,G_jj
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
/// delta,epsilon,phase,mean_density,max_fluct,outcome
void write_phase_csv(std::ostream& out, const PhaseDiagram& pd);
/// delta,epsilon,j,nu_j  (nu_j = NA where undetermined)
void write_winding_csv(std::ostream& out, const std::vector<PhasePoint>& points);
/// j,eps_c_j
void write_critical_csv(std::ostream& out, const CriticalScan& scan);
/// N,derivative,fit
void write_scaling_csv(std::ostream& out, const ScalingFit& fit);
/// row,col,re,im
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXcd& m);
/// U,err_gaussian,err_meanfield
void write_oracle_csv(std::ostream& out, const std::vector<double>& u,
                      const std::vector<AnsatzError>& errs);

nlohmann::json to_json(const GaussianState& s, bool matrices);
nlohmann::json to_json(const SteadyStateReport& r);
nlohmann::json to_json(const SVDAnalysis& s);

}  // namespace ddbh
