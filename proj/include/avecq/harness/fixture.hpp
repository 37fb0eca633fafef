#pragma once

#include <boost/algorithm/string.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "avecq/common/errors.hpp"
#include "avecq/crypto/drbg.hpp"

namespace avecq::harness {

/// Answers by roster position, taken from the fixture rows in worker-index
/// order so that row order in the file never matters.
struct Fixture {
  std::vector<std::uint32_t> indices;
  std::vector<std::uint32_t> answers;

  std::size_t size() const { return answers.size(); }
  std::vector<std::uint32_t> counts(std::uint32_t choices) const {
    std::vector<std::uint32_t> c(choices, 0);
    for (auto a : answers) ++c.at(a);
    return c;
  }
};

namespace detail {
inline std::uint32_t parse_field(const std::string& field, std::size_t line, const char* what) {
  if (field.empty() || field.find_first_not_of("0123456789") != std::string::npos || field.size() > 9)
    throw FixtureError("line " + std::to_string(line) + ": " + what + " '" + field + "' is not a number");
  return static_cast<std::uint32_t>(std::stoul(field));
}
}  // namespace detail

/// Parses `worker,answer` CSV text. Every answer must be below `choices`.
inline Fixture parse_fixture(std::istream& in, std::uint32_t choices) {
  std::string text;
  std::size_t line_no = 0;
  bool header = false;
  std::map<std::uint32_t, std::uint32_t> rows;
  while (std::getline(in, text)) {
    ++line_no;
    boost::algorithm::trim(text);
    if (text.empty()) continue;
    if (!header) {
      auto h = boost::algorithm::erase_all_copy(text, " ");
      if (h != "worker,answer") throw FixtureError("line " + std::to_string(line_no) + ": expected header worker,answer");
      header = true;
      continue;
    }
    std::vector<std::string> cols;
    boost::algorithm::split(cols, text, boost::is_any_of(","));
    if (cols.size() != 2)
      throw FixtureError("line " + std::to_string(line_no) + ": expected 2 columns, found " + std::to_string(cols.size()));
    for (auto& c : cols) boost::algorithm::trim(c);
    auto worker = detail::parse_field(cols[0], line_no, "worker");
    auto answer = detail::parse_field(cols[1], line_no, "answer");
    if (answer >= choices)
      throw FixtureError("line " + std::to_string(line_no) + ": answer " + std::to_string(answer) +
                         " is outside 0.." + std::to_string(choices - 1));
    if (!rows.emplace(worker, answer).second)
      throw FixtureError("line " + std::to_string(line_no) + ": worker " + std::to_string(worker) + " appears twice");
  }
  if (!header) throw FixtureError("fixture is empty");
  Fixture f;
  for (auto [w, a] : rows) {
    f.indices.push_back(w);
    f.answers.push_back(a);
  }
  return f;
}

inline Fixture ingest_fixture(const std::filesystem::path& path, std::uint32_t choices) {
  std::ifstream in(path);
  if (!in) throw FixtureError("cannot open fixture " + path.string());
  return parse_fixture(in, choices);
}

/// Shapes are `<rows>x<choices>` (e.g. 39x2).
inline std::pair<std::uint32_t, std::uint32_t> parse_shape(const std::string& shape) {
  auto x = shape.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("no x");
    std::size_t used = 0;
    auto rows = std::stoul(shape.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("rows");
    auto tail = shape.substr(x + 1);
    auto choices = std::stoul(tail, &used);
    if (used != tail.size()) throw std::invalid_argument("choices");
    if (rows == 0 || choices == 0 || rows > 1'000'000 || choices > 65536) throw std::out_of_range("shape");
    return {static_cast<std::uint32_t>(rows), static_cast<std::uint32_t>(choices)};
  } catch (const std::logic_error&) {
    throw ConfigError("bad fixture shape '" + shape + "' (expected ROWSxCHOICES, e.g. 39x2)");
  }
}

/// Synthetic answers with a skewed distribution: answer j gets weight
/// (c - j)^2, so low ids dominate and majority outcomes are stable.
inline std::string gen_fixture(const std::string& shape, std::uint64_t seed) {
  auto [rows, choices] = parse_shape(shape);
  auto rng = crypto::Drbg(seed).fork("fixture");
  std::uint64_t total = 0;
  std::vector<std::uint64_t> weight(choices);
  for (std::uint32_t j = 0; j < choices; ++j) total += weight[j] = std::uint64_t{choices - j} * (choices - j);
  std::ostringstream out;
  out << "worker,answer\n";
  for (std::uint32_t i = 0; i < rows; ++i) {
    auto r = rng.below(total);
    std::uint32_t a = 0;
    while (r >= weight[a]) r -= weight[a++];
    out << i << ',' << a << '\n';
  }
  return out.str();
}

}  // namespace avecq::harness
