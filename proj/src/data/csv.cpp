#include <charconv>
#include <fstream>
#include <sstream>

#include "pbd/data/dataset.hpp"
#include "pbd/error.hpp"

namespace pbd::data {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw IoError("failed to format value");
  out.append(buf, end);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::size_t a = dataset.alp_dim(), s = dataset.slp_dim();
  std::string text;
  for (std::size_t i = 0; i < a; ++i) text += (i ? ",alp_" : "alp_") + std::to_string(i);
  for (std::size_t i = 0; i < s; ++i) text += ",slp_" + std::to_string(i);
  text += '\n';
  for (const auto& sample : dataset.samples) {
    for (std::size_t i = 0; i < a; ++i) {
      if (i) text += ',';
      append_double(text, sample.alp[i]);
    }
    for (double v : sample.slp) {
      text += ',';
      append_double(text, v);
    }
    text += '\n';
  }
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset read_csv(const std::filesystem::path& path, const std::string& domain_name, std::size_t alp_dim,
                 std::size_t slp_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw ParseError(path.string() + ":1: empty file");
  if (line.back() == '\r') line.pop_back();

  const auto header = split(line);
  std::size_t a = 0, s = 0;
  for (const auto& h : header) {
    if (h == "alp_" + std::to_string(a) && s == 0) {
      ++a;
    } else if (h == "slp_" + std::to_string(s)) {
      ++s;
    } else {
      throw ParseError(path.string() + ":1: unexpected header column '" + h + "'");
    }
  }
  if (a == 0 || s == 0) throw ParseError(path.string() + ":1: header needs alp_ and slp_ columns");
  if ((alp_dim && a != alp_dim) || (slp_dim && s != slp_dim)) {
    throw ParseError(path.string() + ":1: header has " + std::to_string(a) + " ALP / " + std::to_string(s) +
                     " SLP columns, expected " + std::to_string(alp_dim) + " / " + std::to_string(slp_dim));
  }

  Dataset ds{domain_name, {}, 0};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != a + s) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(a + s) +
                       " fields, got " + std::to_string(cells.size()));
    }
    Sample sample;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double v = 0;
      const auto& c = cells[i];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc{} || ptr != c.data() + c.size()) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + c + "'");
      }
      (i < a ? sample.alp : sample.slp).push_back(v);
    }
    ds.samples.push_back(std::move(sample));
  }
  if (ds.samples.empty()) throw ParseError(path.string() + ": no data rows");
  return ds;
}

}  // namespace pbd::data
