#include "slv/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "slv/errors.hpp"

namespace slv {

Pgm16 quantize(const LikelihoodMap& scaled) {
  Pgm16 out{scaled.dims(), {}};
  out.samples.reserve(scaled.size());
  for (double v : scaled.values()) {
    const double q = std::nearbyint(std::clamp(v, 0.0, 1.0) * 65535.0);
    out.samples.push_back(static_cast<std::uint16_t>(q));
  }
  return out;
}

LikelihoodMap dequantize(const Pgm16& image) {
  std::vector<double> values;
  values.reserve(image.samples.size());
  for (std::uint16_t s : image.samples) values.push_back(static_cast<double>(s) / 65535.0);
  return LikelihoodMap(image.dims, std::move(values));
}

void write_pgm(std::ostream& os, const Pgm16& image) {
  os << "P5\n" << image.dims.width << ' ' << image.dims.height << "\n65535\n";
  std::string buf;
  buf.resize(image.samples.size() * 2);
  for (std::size_t k = 0; k < image.samples.size(); ++k) {
    buf[2 * k] = static_cast<char>(image.samples[k] >> 8);
    buf[2 * k + 1] = static_cast<char>(image.samples[k] & 0xff);
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& is) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

std::size_t header_number(std::istream& is) {
  const std::string tok = header_token(is);
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    throw std::runtime_error("pgm: malformed header field '" + tok + "'");
  }
  return std::stoul(tok);
}

}  // namespace

Pgm16 read_pgm(std::istream& is) {
  if (header_token(is) != "P5") throw std::runtime_error("pgm: not a binary P5 file");
  Pgm16 out;
  out.dims.width = header_number(is);
  out.dims.height = header_number(is);
  if (header_number(is) != 65535) throw std::runtime_error("pgm: maxval must be 65535");
  if (!out.dims.valid()) throw std::runtime_error("pgm: empty image");
  // header_token consumed exactly one whitespace byte after maxval.
  std::string buf(out.dims.pixels() * 2, '\0');
  is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (is.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw std::runtime_error("pgm: truncated sample data");
  }
  out.samples.resize(out.dims.pixels());
  for (std::size_t k = 0; k < out.samples.size(); ++k) {
    out.samples[k] = static_cast<std::uint16_t>(
        (static_cast<unsigned char>(buf[2 * k]) << 8) |
        static_cast<unsigned char>(buf[2 * k + 1]));
  }
  return out;
}

std::string sidecar_to_json(const MapSidecar& meta) {
  nlohmann::json j;
  j["width"] = meta.dims.width;
  j["height"] = meta.dims.height;
  j["scale"] = meta.scale;
  j["class"] = meta.class_id;
  j["image_id"] = meta.image_id;
  return j.dump();
}

MapSidecar sidecar_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MapSidecar meta;
  meta.dims.width = j.at("width").get<std::size_t>();
  meta.dims.height = j.at("height").get<std::size_t>();
  meta.scale = j.at("scale").get<double>();
  meta.class_id = j.value("class", -1);
  meta.image_id = j.value("image_id", std::string{});
  return meta;
}

void export_map(const std::filesystem::path& stem, const LikelihoodMap& raw,
                int class_id, const std::string& image_id) {
  const double peak = raw.max();
  const LikelihoodMap scaled = scale_unit(raw);
  auto pgm_path = stem;
  pgm_path += ".pgm";
  auto json_path = stem;
  json_path += ".json";

  std::ofstream pgm(pgm_path, std::ios::binary);
  if (!pgm) throw std::runtime_error("cannot write " + pgm_path.string());
  write_pgm(pgm, quantize(scaled));

  std::ofstream side(json_path);
  if (!side) throw std::runtime_error("cannot write " + json_path.string());
  side << sidecar_to_json({raw.dims(), peak > 0.0 ? peak : 1.0, class_id, image_id})
       << '\n';
}

ImportedMap import_map(const std::filesystem::path& stem) {
  auto pgm_path = stem;
  pgm_path += ".pgm";
  auto json_path = stem;
  json_path += ".json";

  std::ifstream side(json_path);
  if (!side) throw std::runtime_error("cannot read " + json_path.string());
  std::string text((std::istreambuf_iterator<char>(side)), std::istreambuf_iterator<char>());
  MapSidecar meta = sidecar_from_json(text);

  std::ifstream pgm(pgm_path, std::ios::binary);
  if (!pgm) throw std::runtime_error("cannot read " + pgm_path.string());
  Pgm16 image = read_pgm(pgm);
  if (!(image.dims == meta.dims)) {
    throw std::runtime_error("pgm dims disagree with sidecar for " + stem.string());
  }
  return {dequantize(image), meta};
}

}  // namespace slv
