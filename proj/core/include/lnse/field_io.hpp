#pragma once

// LNSF binary field files.
// Layout: magic "LNSF" | u32 version=1 | u32 flags (bit0: 0=spectral,1=physical)
//         | u32 dims[3] | u32 n_components | f64 data little-endian,
// data interleaved (re,im) per coefficient, component-major, row-major.
// Physical fields are stored with im = 0.

#include <string>

#include "lnse/field.hpp"

namespace lnse {

void write_lnsf(const std::string& path, const SpectralField& f);
void write_lnsf(const std::string& path, const PhysicalField& f);
bool read_lnsf_is_physical(const std::string& path);
SpectralField read_lnsf_spectral(const std::string& path);
PhysicalField read_lnsf_physical(const std::string& path);

}  // namespace lnse
