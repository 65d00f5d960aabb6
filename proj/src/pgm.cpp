#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "fco/bev.hpp"

namespace fco {

void write_pgm(const BinaryGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << grid.cols() << ' ' << grid.rows() << "\n255\n";
  std::string payload(static_cast<std::size_t>(grid.data.size()), '\0');
  for (Eigen::Index i = 0; i < grid.data.size(); ++i) {
    payload[static_cast<std::size_t>(i)] = grid.data.data()[i] ? static_cast<char>(255) : '\0';
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

GridData<std::uint8_t> read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  std::size_t line = 1;

  // Header tokens are separated by whitespace; '#' starts a comment to end of line.
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (c == '\n') ++line;
        ++pos;
      } else {
        break;
      }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#') {
      tok += bytes[pos++];
    }
    if (tok.empty()) throw ParseError(line, "truncated PGM header in " + path.string());
    return tok;
  };
  auto next_int = [&]() {
    const std::string tok = next_token();
    for (char c : tok) {
      if (!std::isdigit(static_cast<unsigned char>(c))) throw ParseError(line, "bad PGM header value '" + tok + "'");
    }
    return std::stoi(tok);
  };

  if (next_token() != "P5") throw ParseError(line, "not a binary PGM (P5) file: " + path.string());
  const int width = next_int();
  const int height = next_int();
  const int maxval = next_int();
  if (width <= 0 || height <= 0) throw ParseError(line, "PGM dimensions must be positive");
  if (maxval <= 0 || maxval > 255) throw ParseError(line, "only 8-bit PGM files are supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw ParseError(line, "missing whitespace after PGM header");
  }
  ++pos;
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos < n) throw ParseError(line, "truncated PGM payload in " + path.string());

  GridData<std::uint8_t> data(height, width);
  for (std::size_t i = 0; i < n; ++i) data.data()[i] = static_cast<std::uint8_t>(bytes[pos + i]);
  return data;
}

BinaryGrid read_binary_pgm(const std::filesystem::path& path, const GridSpec& spec) {
  auto raw = read_pgm(path);
  if (raw.rows() != spec.size_px || raw.cols() != spec.size_px) {
    throw ParseError(1, "PGM size does not match the grid spec: " + path.string());
  }
  return {spec, (raw >= std::uint8_t{128}).cast<std::uint8_t>()};
}

}  // namespace fco
