#include "chemokin/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "chemokin/error.hpp"

namespace chemokin {

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& text) {
  if (text == "NA") return kMissing;
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) throw ConfigError("not a number: '" + text + "'");
  return v;
}

void write_profile_csv(std::ostream& out, const GridProfile& p) {
  const CellGeometry& g = p.geometry;
  if (g.dim == 1) {
    out << "x,rho,rho_f,rho_g,xi_plus,xi_minus,xi_bar\n";
    for (int i = 0; i < g.n; ++i) {
      out << format_number(g.center(i)) << ',' << format_number(p.rho[i]) << ',' << format_number(p.rho_f[i]) << ','
          << format_number(p.rho_g[i]) << ',' << format_number(p.xi_plus[i]) << ',' << format_number(p.xi_minus[i])
          << ',' << format_number(p.xi_bar[i]) << '\n';
    }
    return;
  }
  out << "x1,x2,rho,rho_f,rho_g,xi_bar\n";
  for (int i1 = 0; i1 < g.n; ++i1) {
    for (int i2 = 0; i2 < g.n; ++i2) {
      const int c = i1 + i2 * g.n;
      out << format_number(g.center(i1)) << ',' << format_number(g.center(i2)) << ',' << format_number(p.rho[c])
          << ',' << format_number(p.rho_f[c]) << ',' << format_number(p.rho_g[c]) << ','
          << format_number(p.xi_bar[c]) << '\n';
    }
  }
}

std::string profile_csv(const GridProfile& profile) {
  std::ostringstream os;
  write_profile_csv(os, profile);
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

GridProfile read_profile_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("empty profile CSV");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const bool one = header == "x,rho,rho_f,rho_g,xi_plus,xi_minus,xi_bar";
  const bool two = header == "x1,x2,rho,rho_f,rho_g,xi_bar";
  if (!one && !two) throw ConfigError("unrecognised profile CSV header '" + header + "'");
  const std::size_t width = one ? 7 : 6;

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != width) throw ConfigError("profile CSV row has " + std::to_string(fields.size()) + " fields");
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_number(f));
    rows.push_back(std::move(row));
  }

  int n = static_cast<int>(rows.size());
  if (two) {
    n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rows.size()))));
    if (static_cast<std::size_t>(n) * n != rows.size()) throw ConfigError("2D profile CSV is not square");
  }
  if (n < 2) throw ConfigError("profile CSV needs at least two cells per axis");
  // Centres along the fastest-varying axis.
  const std::size_t col = one ? 0 : 1;
  std::vector<double> centres(n);
  for (int i = 0; i < n; ++i) centres[i] = rows[i][col];
  const double span = centres[n - 1] - centres[0];
  if (!(span > 0.0)) throw ConfigError("profile CSV cell centres must increase");
  // The length written by the solver is usually short in decimal; prefer the
  // 12-digit rounding when it regenerates every centre bit for bit.
  const double estimate = span * n / (n - 1);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", estimate);
  CellGeometry geometry{one ? 1 : 2, n, std::strtod(buf, nullptr)};
  for (int i = 0; i < n; ++i) {
    if (geometry.center(i) != centres[i]) {
      geometry.length = estimate;
      break;
    }
  }
  GridProfile p = GridProfile::zeros(geometry);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& v = rows[r];
    if (one) {
      p.rho[r] = v[1];
      p.rho_f[r] = v[2];
      p.rho_g[r] = v[3];
      p.xi_plus[r] = v[4];
      p.xi_minus[r] = v[5];
      p.xi_bar[r] = v[6];
    } else {
      const int i1 = static_cast<int>(r) / n;
      const int i2 = static_cast<int>(r) % n;
      const int c = i1 + i2 * n;
      p.rho[c] = v[2];
      p.rho_f[c] = v[3];
      p.rho_g[c] = v[4];
      p.xi_bar[c] = v[5];
    }
  }
  return p;
}

void write_bimodality_csv(std::ostream& out, const std::vector<BimodalityPoint>& points) {
  out << "param,rho_dd,rho_g_dd,source\n";
  for (const auto& pt : points) {
    out << format_number(pt.param) << ',' << format_number(pt.rho_dd) << ',' << format_number(pt.rho_g_dd) << ','
        << to_string(pt.source) << '\n';
  }
}

std::string bimodality_csv(const std::vector<BimodalityPoint>& points) {
  std::ostringstream os;
  write_bimodality_csv(os, points);
  return os.str();
}

}  // namespace chemokin
