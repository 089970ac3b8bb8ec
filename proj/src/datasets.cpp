#include "c3bv/datasets.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace c3bv {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

double parse_rating(const std::string& field, std::size_t line_no, const std::string& where) {
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(where + ":" + std::to_string(line_no) + ": bad rating '" + field + "'", line_no);
  }
  return value;
}

std::int64_t parse_int(const std::string& field, std::size_t line_no, const std::string& where) {
  std::int64_t value = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(where + ":" + std::to_string(line_no) + ": bad integer '" + field + "'", line_no);
  }
  return value;
}

}  // namespace

int RatingTable::intern(const std::string& id, std::vector<std::string>& ids,
                        std::unordered_map<std::string, int>& index) {
  auto [it, inserted] = index.try_emplace(id, static_cast<int>(ids.size()));
  if (inserted) ids.push_back(id);
  return it->second;
}

bool RatingTable::add(const std::string& user_id, const std::string& item_id, double rating,
                      std::optional<std::int64_t> timestamp) {
  const int u = intern(user_id, user_ids_, user_index_);
  const int i = intern(item_id, item_ids_, item_index_);
  const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
                   static_cast<std::uint32_t>(i);
  auto [it, inserted] = pair_index_.try_emplace(key, triples_.size());
  if (inserted) {
    triples_.push_back({u, i, rating, timestamp});
    return true;
  }
  Triple& old = triples_[it->second];
  const bool newer = !old.timestamp || !timestamp || *timestamp >= *old.timestamp;
  if (newer) {
    old.rating = rating;
    old.timestamp = timestamp;
  }
  return false;
}

RatingTable parse_movielens(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string where = path.string();
  RatingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw ParseError(where + ":" + std::to_string(line_no) + ": expected 4 tab-separated fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError(where + ":" + std::to_string(line_no) + ": empty user or item id", line_no);
    }
    table.add(fields[0], fields[1], parse_rating(fields[2], line_no, where),
              parse_int(fields[3], line_no, where));
  }
  if (table.empty()) throw ParseError(where + ": no ratings found", line_no);
  return table;
}

RatingTable parse_amazon_5core(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string where = path.string();
  RatingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ":" + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")", line_no);
    }
    try {
      const auto user = record.at("reviewerID").get<std::string>();
      const auto item = record.at("asin").get<std::string>();
      const auto rating = record.at("overall").get<double>();
      std::optional<std::int64_t> ts;
      if (record.contains("unixReviewTime")) ts = record.at("unixReviewTime").get<std::int64_t>();
      if (user.empty() || item.empty() || !std::isfinite(rating)) {
        throw ParseError(where + ":" + std::to_string(line_no) + ": empty id or bad rating", line_no);
      }
      table.add(user, item, rating, ts);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ":" + std::to_string(line_no) + ": missing or mistyped field (" + e.what() + ")",
                       line_no);
    }
  }
  if (table.empty()) throw ParseError(where + ": no ratings found", line_no);
  return table;
}

void write_rating_table(const RatingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "user_id,item_id,rating,timestamp\n";
  char buf[64];
  for (const auto& t : table.triples()) {
    auto res = std::to_chars(buf, buf + sizeof buf, t.rating);
    out << table.user_ids()[static_cast<std::size_t>(t.user)] << ','
        << table.item_ids()[static_cast<std::size_t>(t.item)] << ',' << std::string_view(buf, res.ptr - buf) << ',';
    if (t.timestamp) out << *t.timestamp;
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

RatingTable read_rating_table(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string where = path.string();
  RatingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line_no == 1 || line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) {
      throw ParseError(where + ":" + std::to_string(line_no) + ": expected 4 comma-separated fields", line_no);
    }
    std::optional<std::int64_t> ts;
    if (!fields[3].empty()) ts = parse_int(fields[3], line_no, where);
    table.add(fields[0], fields[1], parse_rating(fields[2], line_no, where), ts);
  }
  if (table.empty()) throw ParseError(where + ": no ratings found", line_no);
  return table;
}

}  // namespace c3bv
