#include "demest/dem_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace demest {

namespace {

struct ErrorRecord {
  double rate;
  std::vector<uint32_t> detectors;
  size_t line;
};

struct CoordRecord {
  uint32_t detector;
  Coord coord;
};

void skip_spaces(std::string_view& s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
}

bool consume(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

double parse_double(std::string_view& s, size_t line) {
  skip_spaces(s);
  const char* begin = s.data();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) throw ParseError("expected a number", line);
  s.remove_prefix(static_cast<size_t>(end - begin));
  return v;
}

uint32_t parse_uint(std::string_view& s, size_t line) {
  skip_spaces(s);
  uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr == s.data())
    throw ParseError("expected a non-negative integer", line);
  s.remove_prefix(static_cast<size_t>(ptr - s.data()));
  return v;
}

std::string_view read_word(std::string_view& s) {
  skip_spaces(s);
  size_t len = 0;
  while (len < s.size() && s[len] != ' ' && s[len] != '\t' && s[len] != '(')
    ++len;
  auto word = s.substr(0, len);
  s.remove_prefix(len);
  return word;
}

}  // namespace

Dem parse_dem(const std::string& text, uint32_t detector_count) {
  std::vector<ErrorRecord> errors;
  std::vector<CoordRecord> coords;
  uint32_t max_index_seen = 0;
  bool any_index = false;

  std::istringstream stream(text);
  std::string raw_line;
  size_t lineno = 0;
  while (std::getline(stream, raw_line)) {
    ++lineno;
    std::string_view line(raw_line);
    if (auto pos = line.find('#'); pos != std::string_view::npos)
      line = line.substr(0, pos);
    skip_spaces(line);
    if (line.empty()) continue;

    std::string_view keyword = read_word(line);
    skip_spaces(line);
    if (keyword == "error" || keyword == "detector") {
      if (!consume(line, '(')) throw ParseError("expected '(' after instruction", lineno);
      std::vector<double> args;
      for (;;) {
        args.push_back(parse_double(line, lineno));
        skip_spaces(line);
        if (consume(line, ',')) continue;
        if (consume(line, ')')) break;
        throw ParseError("expected ',' or ')' in argument list", lineno);
      }
      std::vector<uint32_t> detectors;
      for (;;) {
        skip_spaces(line);
        if (line.empty()) break;
        if (consume(line, 'D')) {
          uint32_t d = parse_uint(line, lineno);
          detectors.push_back(d);
          max_index_seen = std::max(max_index_seen, d);
          any_index = true;
        } else if (consume(line, 'L')) {
          // Logical-observable target: parsed, intentionally ignored.
          parse_uint(line, lineno);
        } else if (consume(line, '^')) {
          // Separator used by decomposed errors; ignore.
        } else {
          throw ParseError("unexpected target '" + std::string(1, line.front()) + "'",
                           lineno);
        }
      }
      if (keyword == "error") {
        if (args.size() != 1) throw ParseError("error() takes exactly one rate", lineno);
        if (args[0] < 0.0 || args[0] > 1.0)
          throw ParseError("error rate must lie in [0, 1]", lineno);
        if (detectors.empty())
          throw ParseError("error record names no detectors", lineno);
        auto sorted = detectors;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
          throw ParseError("duplicate detector in one error record", lineno);
        errors.push_back({args[0], std::move(sorted), lineno});
      } else {
        if (detectors.size() != 1)
          throw ParseError("detector() takes exactly one D target", lineno);
        // Last coordinate is the round index; leading ones fill x then y.
        Coord c;
        c.t = args.back();
        if (args.size() >= 2) c.x = args[0];
        if (args.size() >= 3) c.y = args[1];
        coords.push_back({detectors[0], c});
      }
    } else {
      throw ParseError("unsupported instruction '" + std::string(keyword) + "'", lineno);
    }
  }

  uint32_t n = detector_count;
  if (n == 0) {
    n = any_index ? max_index_seen + 1 : 0;
  } else if (any_index && max_index_seen >= n) {
    throw ParseError("detector index " + std::to_string(max_index_seen) +
                         " exceeds declared detector count " + std::to_string(n),
                     0);
  }

  Dem dem(n);
  for (auto& rec : errors)
    dem.add_edge(DetectorSet(std::move(rec.detectors), n), rec.rate);
  for (const auto& rec : coords) dem.coords.set(rec.detector, rec.coord);
  return dem;
}

Dem read_dem_file(const std::filesystem::path& path, uint32_t detector_count) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dem(buf.str(), detector_count);
}

std::string write_dem(const Dem& dem) {
  std::string out = "# detector error model, " + std::to_string(dem.detector_count()) +
                    " detectors, " + std::to_string(dem.edge_count()) + " errors\n";
  char buf[128];
  std::vector<uint32_t> dets;
  for (const auto& [det, c] : dem.coords.entries()) dets.push_back(det);
  std::sort(dets.begin(), dets.end());
  for (uint32_t det : dets) {
    const Coord& c = dem.coords.at(det);
    std::snprintf(buf, sizeof buf, "detector(%.17g, %.17g, %.17g) D%u\n", c.x,
                  c.y, c.t, det);
    out += buf;
  }
  std::vector<size_t> order(dem.edge_count());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return linear_extension_less(dem.edge(a), dem.edge(b));
  });
  for (size_t i : order) {
    std::snprintf(buf, sizeof buf, "error(%.17g)", dem.rate(i));
    out += buf;
    for (uint32_t d : dem.edge(i).indices()) {
      out += " D";
      out += std::to_string(d);
    }
    out += '\n';
  }
  return out;
}

void write_dem_file(const std::filesystem::path& path, const Dem& dem) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << write_dem(dem);
}

}  // namespace demest
