#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "chemokin/diagnostics.hpp"
#include "chemokin/grid_profile.hpp"

namespace chemokin {

/// 17 significant digits; NaN as NA, infinities as inf / -inf.
std::string format_number(double v);

/// Inverse of format_number; NA gives kMissing. Throws ConfigError otherwise.
double parse_number(const std::string& text);

/// 1D: x,rho,rho_f,rho_g,xi_plus,xi_minus,xi_bar, one row per cell centre.
/// 2D: x1,x2,rho,rho_f,rho_g,xi_bar, row-major (x1 outer, x2 inner).
void write_profile_csv(std::ostream& out, const GridProfile& profile);
std::string profile_csv(const GridProfile& profile);

/// Reads either schema back. The geometry is recovered from the cell centres
/// (uniform spacing, domain centred on 0).
GridProfile read_profile_csv(std::istream& in);

/// param,rho_dd,rho_g_dd,source
void write_bimodality_csv(std::ostream& out, const std::vector<BimodalityPoint>& points);
std::string bimodality_csv(const std::vector<BimodalityPoint>& points);

}  // namespace chemokin
