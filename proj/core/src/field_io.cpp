#include "lnse/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace lnse {
namespace {

static_assert(std::endian::native == std::endian::little,
              "LNSF writer assumes a little-endian host");

constexpr char kMagic[4] = {'L', 'N', 'S', 'F'};
constexpr uint32_t kVersion = 1;

void write_header(std::ofstream& out, uint32_t flags, Dims d, uint32_t nc) {
  out.write(kMagic, 4);
  uint32_t h[6] = {kVersion, flags, uint32_t(d.n0), uint32_t(d.n1), uint32_t(d.n2), nc};
  out.write(reinterpret_cast<const char*>(h), sizeof(h));
}

struct Header {
  uint32_t flags = 0;
  Dims dims;
  uint32_t nc = 0;
};

Header read_header(std::ifstream& in, const std::string& path) {
  char magic[4];
  uint32_t h[6];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(h), sizeof(h));
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not an LNSF file: " + path);
  if (h[0] != kVersion) throw std::runtime_error("unsupported LNSF version in " + path);
  return {h[1], Dims{int(h[2]), int(h[3]), int(h[4])}, h[5]};
}

}  // namespace

void write_lnsf(const std::string& path, const SpectralField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_header(out, 0, f.dims(), uint32_t(f.n_components()));
  out.write(reinterpret_cast<const char*>(f.data().data()),
            std::streamsize(f.data().size() * sizeof(cplx)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_lnsf(const std::string& path, const PhysicalField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_header(out, 1, f.dims, uint32_t(f.n_components));
  std::vector<double> pair(2, 0.0);
  for (double v : f.v) {
    pair[0] = v;
    out.write(reinterpret_cast<const char*>(pair.data()), 2 * sizeof(double));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

bool read_lnsf_is_physical(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return (read_header(in, path).flags & 1u) != 0;
}

SpectralField read_lnsf_spectral(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Header h = read_header(in, path);
  if (h.flags & 1u) throw std::runtime_error("LNSF file is physical, not spectral: " + path);
  SpectralField f(h.dims, int(h.nc));
  in.read(reinterpret_cast<char*>(f.data().data()),
          std::streamsize(f.data().size() * sizeof(cplx)));
  if (!in) throw std::runtime_error("truncated LNSF file: " + path);
  return f;
}

PhysicalField read_lnsf_physical(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Header h = read_header(in, path);
  if (!(h.flags & 1u)) throw std::runtime_error("LNSF file is spectral, not physical: " + path);
  PhysicalField f(h.dims, int(h.nc));
  double pair[2];
  for (double& v : f.v) {
    in.read(reinterpret_cast<char*>(pair), 2 * sizeof(double));
    v = pair[0];
  }
  if (!in) throw std::runtime_error("truncated LNSF file: " + path);
  return f;
}

}  // namespace lnse
