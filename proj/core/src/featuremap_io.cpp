#include "padlab/featuremap_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <system_error>

namespace padlab {

std::string format_double(double value) {
  std::array<char, 32> buffer;
  const auto [ptr, ec] =
      std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) {
    throw Error("double formatting failed");
  }
  return std::string(buffer.data(), ptr);
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) {
    return field;
  }
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string feature_map_csv(const FeatureMap& map) {
  std::string out;
  for (int c = 0; c < map.channels(); ++c) {
    for (int y = 0; y < map.height(); ++y) {
      for (int x = 0; x < map.width(); ++x) {
        if (x > 0) out += ',';
        out += format_double(map.at(c, y, x));
      }
      out += '\n';
    }
  }
  return out;
}

FeatureMap feature_map_from_csv(const std::string& text, int channels,
                                GridSize size) {
  FeatureMap map(channels, size, 0.0);
  std::istringstream stream(text);
  std::string line;
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < size.height; ++y) {
      if (!std::getline(stream, line)) {
        throw DimensionError("CSV ends before row (" + std::to_string(c) +
                             "," + std::to_string(y) + ")");
      }
      const char* pos = line.data();
      const char* end = line.data() + line.size();
      for (int x = 0; x < size.width; ++x) {
        double value = 0.0;
        const auto [next, ec] = std::from_chars(pos, end, value);
        if (ec != std::errc()) {
          throw DimensionError("bad CSV value in row (" + std::to_string(c) +
                               "," + std::to_string(y) + ")");
        }
        map.at(c, y, x) = value;
        pos = next;
        if (x + 1 < size.width) {
          if (pos == end || *pos != ',') {
            throw DimensionError("short CSV row (" + std::to_string(c) + "," +
                                 std::to_string(y) + ")");
          }
          ++pos;
        }
      }
    }
  }
  return map;
}

namespace {

std::string grid_pgm(const double* values, GridSize size, PgmMapping& mapping) {
  double lo = values[0];
  double hi = values[0];
  for (std::int64_t i = 0; i < size.cells(); ++i) {
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  mapping = {lo, hi};
  const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;

  std::string out = "P2\n";
  out += std::to_string(size.width) + " " + std::to_string(size.height) + "\n";
  out += "65535\n";
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const double v = values[static_cast<std::int64_t>(y) * size.width + x];
      const long sample = std::lround((v - lo) * scale);
      if (x > 0) out += ' ';
      out += std::to_string(sample);
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string feature_map_pgm(const FeatureMap& map, int channel,
                            PgmMapping& mapping) {
  if (channel < 0 || channel >= map.channels()) {
    throw DimensionError("channel " + std::to_string(channel) +
                         " out of range");
  }
  return grid_pgm(map.channel(channel).data(), map.size(), mapping);
}

std::string values_pgm(const std::vector<double>& values, GridSize size,
                       PgmMapping& mapping) {
  if (static_cast<std::int64_t>(values.size()) != size.cells()) {
    throw DimensionError("value grid does not match " + size.str());
  }
  return grid_pgm(values.data(), size, mapping);
}

}  // namespace padlab
