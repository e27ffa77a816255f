#include "ddbh/io.hpp"

#include <charconv>
#include <cmath>

namespace ddbh {

namespace {

nlohmann::json number(double v) {
  // JSON has no inf/nan literals.
  if (std::isfinite(v)) return v;
  return format_number(v);
}

nlohmann::json matrix_json(const Eigen::MatrixXcd& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    std::vector<double> r(m.cols()), c(m.cols());
    for (int k = 0; k < m.cols(); ++k) {
      r[k] = m(i, k).real();
      c[k] = m(i, k).imag();
    }
    re.push_back(r);
    im.push_back(c);
  }
  return {{"re", re}, {"im", im}};
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,j,re_alpha,im_alpha,G_jj\n";
  for (const auto& s : traj.samples)
    for (int j = 0; j < s.size(); ++j)
      out << format_number(s.t) << ',' << j + 1 << ',' << format_number(s.alpha[j].real()) << ','
          << format_number(s.alpha[j].imag()) << ',' << format_number(s.G(j, j).real()) << '\n';
}

void write_phase_csv(std::ostream& out, const PhaseDiagram& pd) {
  out << "delta,epsilon,phase,mean_density,max_fluct,outcome\n";
  for (const auto& p : pd.points)
    out << format_number(p.delta) << ',' << format_number(p.epsilon) << ',' << to_string(p.phase)
        << ',' << format_number(p.mean_density) << ',' << format_number(p.max_fluct) << ','
        << to_string(p.outcome) << '\n';
}

void write_winding_csv(std::ostream& out, const std::vector<PhasePoint>& points) {
  out << "delta,epsilon,j,nu_j\n";
  for (const auto& p : points)
    for (size_t j = 0; j < p.nu_profile.size(); ++j) {
      out << format_number(p.delta) << ',' << format_number(p.epsilon) << ',' << j + 1 << ',';
      if (p.nu_profile[j]) out << *p.nu_profile[j];
      else out << "NA";
      out << '\n';
    }
}

void write_critical_csv(std::ostream& out, const CriticalScan& scan) {
  out << "j,eps_c_j\n";
  for (int j = 0; j < scan.eps_c_per_site.size(); ++j)
    out << j + 1 << ',' << format_number(scan.eps_c_per_site[j]) << '\n';
}

void write_scaling_csv(std::ostream& out, const ScalingFit& fit) {
  out << "N,derivative,fit\n";
  for (size_t i = 0; i < fit.sizes.size(); ++i) {
    const double model = std::exp(fit.intercept) * std::pow(fit.sizes[i], fit.exponent_a);
    out << fit.sizes[i] << ',' << format_number(fit.derivatives[i]) << ',' << format_number(model)
        << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXcd& m) {
  out << "row,col,re,im\n";
  for (int i = 0; i < m.rows(); ++i)
    for (int k = 0; k < m.cols(); ++k)
      out << i + 1 << ',' << k + 1 << ',' << format_number(m(i, k).real()) << ','
          << format_number(m(i, k).imag()) << '\n';
}

void write_oracle_csv(std::ostream& out, const std::vector<double>& u,
                      const std::vector<AnsatzError>& errs) {
  out << "U,err_gaussian,err_meanfield\n";
  for (size_t i = 0; i < u.size() && i < errs.size(); ++i)
    out << format_number(u[i]) << ',' << format_number(errs[i].err_gaussian) << ','
        << format_number(errs[i].err_meanfield) << '\n';
}

nlohmann::json to_json(const GaussianState& s, bool matrices) {
  std::vector<double> re(s.size()), im(s.size()), n(s.size());
  for (int j = 0; j < s.size(); ++j) {
    re[j] = s.alpha[j].real();
    im[j] = s.alpha[j].imag();
    n[j] = s.G(j, j).real();
  }
  nlohmann::json j{{"t", s.t}, {"alpha", {{"re", re}, {"im", im}}}, {"G_diag", n}};
  if (matrices) {
    j["G"] = matrix_json(s.G);
    j["F"] = matrix_json(s.F);
  }
  return j;
}

nlohmann::json to_json(const SteadyStateReport& r) {
  nlohmann::json j{{"outcome", to_string(r.outcome)},
                   {"residual", number(r.residual)},
                   {"t_final", r.state.t},
                   {"envelope", {number(r.envelope.first), number(r.envelope.second)}}};
  j["t_converged"] = r.t_converged ? nlohmann::json(*r.t_converged) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const SVDAnalysis& s) {
  std::vector<double> sv(s.singular_values.data(),
                         s.singular_values.data() + s.singular_values.size());
  return {{"s_min", number(s.s_min)},
          {"frobenius_G", number(s.frobenius_G)},
          {"gap_ratio", number(s.gap_ratio)},
          {"singular_values", sv}};
}

}  // namespace ddbh
