#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "slv/likelihood.hpp"

namespace slv {

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples).
struct Pgm16 {
  ImageDims dims;
  std::vector<std::uint16_t> samples;
};

/// round(v * 65535) for every value; values are expected in [0, 1].
Pgm16 quantize(const LikelihoodMap& scaled);
LikelihoodMap dequantize(const Pgm16& image);

void write_pgm(std::ostream& os, const Pgm16& image);
Pgm16 read_pgm(std::istream& is);

/// Metadata written next to each exported map. `scale` is the factor the
/// unit-range map was divided by, so `dequantize(pgm) * scale` approximates
/// the raw accumulated map.
struct MapSidecar {
  ImageDims dims;
  double scale = 1.0;
  int class_id = -1;
  std::string image_id;
};

std::string sidecar_to_json(const MapSidecar& meta);
MapSidecar sidecar_from_json(const std::string& text);

/// Writes `<stem>.pgm` and `<stem>.json`; `raw` is scaled to [0, 1] first.
void export_map(const std::filesystem::path& stem, const LikelihoodMap& raw,
                int class_id, const std::string& image_id);

struct ImportedMap {
  LikelihoodMap scaled;
  MapSidecar meta;
};

ImportedMap import_map(const std::filesystem::path& stem);

}  // namespace slv
