#include "wgdet/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wgdet {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void to_json(nlohmann::json& j, const AtomArray& array) {
  j = nlohmann::json{{"geometry", std::string(to_string(array.geometry))},
                     {"positions", array.positions},
                     {"lattice", array.lattice},
                     {"sigma", array.sigma}};
}

void from_json(const nlohmann::json& j, AtomArray& array) {
  array.geometry = geometry_from_string(j.at("geometry").get<std::string>());
  array.positions = j.at("positions").get<std::vector<double>>();
  array.lattice = j.value("lattice", 1.0);
  array.sigma = j.value("sigma", 0.0);
  if (array.positions.empty()) throw GeometryError("atom array must contain at least one atom");
  if (array.sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string_view library_version() { return "wgdet 1.0.0"; }

}  // namespace wgdet
