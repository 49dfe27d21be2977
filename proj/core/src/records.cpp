#include "threebox/records.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "threebox/errors.hpp"

namespace threebox {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

[[noreturn]] void fail(std::size_t line_number, const std::string& what) {
  throw RecordFormatError("record line " + std::to_string(line_number) + ": " + what);
}

bool parse_bool(const std::string& s, std::size_t line_number, const char* column) {
  if (s == "true") return true;
  if (s == "false") return false;
  fail(line_number, std::string("bad boolean in ") + column + ": '" + s + "'");
}

std::uint64_t parse_u64(const std::string& s, std::size_t line_number, const char* column) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    fail(line_number, std::string("bad integer in ") + column + ": '" + s + "'");
  }
  return v;
}

}  // namespace

std::string to_csv_row(const RoundRecord& r) {
  std::ostringstream os;
  os << r.round_id << ',' << to_string(r.engine) << ',' << to_string(r.context) << ',';
  if (r.bob_outcome) os << to_string(*r.bob_outcome);
  os << ',' << bool_str(r.alice_m3) << ',' << bool_str(r.alice_bets) << ',';
  if (r.alice_wins) os << bool_str(*r.alice_wins);
  for (int t = 0; t < 3; ++t) {
    os << ',';
    if (r.ground_truth_boxes) os << (*r.ground_truth_boxes)[static_cast<std::size_t>(t)];
  }
  os << ',' << r.seed_path;
  return os.str();
}

RoundRecord parse_csv_row(const std::string& line, std::size_t line_number) {
  const auto f = split(line);
  if (f.size() != 11) fail(line_number, "expected 11 columns, got " + std::to_string(f.size()));
  RoundRecord r;
  try {
    r.round_id = parse_u64(f[0], line_number, "round_id");
    r.engine = parse_engine(f[1]);
    r.context = parse_context(f[2]);
    if (!f[3].empty()) r.bob_outcome = parse_bob_outcome(f[3]);
  } catch (const ConfigError& e) {
    fail(line_number, e.what());
  }
  r.alice_m3 = parse_bool(f[4], line_number, "alice_m3");
  r.alice_bets = parse_bool(f[5], line_number, "alice_bets");
  if (!f[6].empty()) r.alice_wins = parse_bool(f[6], line_number, "alice_wins");
  const bool any_box = !f[7].empty() || !f[8].empty() || !f[9].empty();
  if (any_box) {
    std::array<int, 3> boxes{};
    for (int t = 0; t < 3; ++t) {
      const auto v = parse_u64(f[static_cast<std::size_t>(7 + t)], line_number, "gt_box");
      if (v < 1 || v > 3) fail(line_number, "ground-truth box out of range");
      boxes[static_cast<std::size_t>(t)] = static_cast<int>(v);
    }
    r.ground_truth_boxes = boxes;
  }
  r.seed_path = f[10];

  if ((r.context == Context::kNone) != !r.bob_outcome) {
    fail(line_number, "bob_outcome must be empty exactly for context 'none'");
  }
  if (r.alice_bets != r.alice_m3) fail(line_number, "alice_bets must equal alice_m3");
  if (r.alice_wins.has_value() != (r.alice_bets && r.context != Context::kNone)) {
    fail(line_number, "alice_wins must be set exactly on bet rounds with a Bob measurement");
  }
  if (r.ground_truth_boxes.has_value() != (r.engine == Engine::kMacroreal)) {
    fail(line_number, "ground-truth boxes must be present exactly for macroreal records");
  }
  return r;
}

void write_records_csv(std::ostream& out, std::span<const RoundRecord> records) {
  out << kRecordCsvHeader << '\n';
  for (const auto& r : records) out << to_csv_row(r) << '\n';
}

std::vector<RoundRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw RecordFormatError("record file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordCsvHeader) throw RecordFormatError("record file has an unexpected header");
  std::vector<RoundRecord> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    out.push_back(parse_csv_row(line, n));
  }
  return out;
}

void save_records_csv(const std::filesystem::path& path, std::span<const RoundRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  write_records_csv(out, records);
  out.flush();
  if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

std::vector<RoundRecord> load_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  return read_records_csv(in);
}

nlohmann::json to_json(const RoundRecord& r) {
  nlohmann::json j = {{"round_id", r.round_id},
                      {"engine", std::string(to_string(r.engine))},
                      {"context", std::string(to_string(r.context))},
                      {"alice_m3", r.alice_m3},
                      {"alice_bets", r.alice_bets},
                      {"seed_path", r.seed_path}};
  j["bob_outcome"] = r.bob_outcome ? nlohmann::json(std::string(to_string(*r.bob_outcome))) : nlohmann::json(nullptr);
  j["alice_wins"] = r.alice_wins ? nlohmann::json(*r.alice_wins) : nlohmann::json(nullptr);
  j["ground_truth_boxes"] = r.ground_truth_boxes ? nlohmann::json(*r.ground_truth_boxes) : nlohmann::json(nullptr);
  return j;
}

}  // namespace threebox
