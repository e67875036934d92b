#include "dam/results_csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>

namespace dam {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string sweep_csv_row(const SweepResult& r) {
  const auto& p = r.point;
  std::string degree;
  switch (p.model.kind) {
    case ModelKind::Classical:
      degree = "2";
      break;
    case ModelKind::Polynomial:
    case ModelKind::PowerInteraction:
      degree = std::to_string(p.model.degree);
      break;
    case ModelKind::Exponential:
      break;
  }
  std::string row;
  row.reserve(160);
  auto field = [&row](std::string_view s) {
    if (!row.empty()) row.push_back(',');
    row.append(s);
  };
  // The first field may legitimately be empty only for "model", which never is.
  row.append(to_string(p.model.kind));
  row.push_back(',');
  row.append(degree);
  field(std::to_string(p.n_neurons));
  field(std::to_string(p.n_patterns));
  field(format_double(r.alpha));
  field(format_double(r.rho));
  field(std::to_string(p.n_flips));
  field(to_string(p.scheduler.kind));
  field(std::to_string(r.n_trials));
  field(std::to_string(r.n_success));
  field(format_double(r.wilson.low));
  field(format_double(r.wilson.high));
  field(format_double(r.mean_residual_fraction));
  field(format_double(r.alpha_star));
  field(std::to_string(r.master_seed));
  return row;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepResult> results, bool header) {
  if (header) out << kSweepCsvHeader << '\n';
  for (const auto& r : results) out << sweep_csv_row(r) << '\n';
}

}  // namespace dam
