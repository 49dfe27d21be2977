#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "threebox/types.hpp"

namespace threebox {

// Column order of the record CSV. Absent optionals are empty fields.
inline constexpr const char* kRecordCsvHeader =
    "round_id,engine,context,bob_outcome,alice_m3,alice_bets,alice_wins,gt_box_t1,gt_box_t2,"
    "gt_box_t3,seed_path";

// One CSV row, no trailing newline. Also the canonical form hashed by the
// session service's commitments.
std::string to_csv_row(const RoundRecord& r);

// Throws RecordFormatError with the offending line number.
RoundRecord parse_csv_row(const std::string& line, std::size_t line_number = 0);

void write_records_csv(std::ostream& out, std::span<const RoundRecord> records);
std::vector<RoundRecord> read_records_csv(std::istream& in);

// Throws std::ios_base::failure on I/O errors.
void save_records_csv(const std::filesystem::path& path, std::span<const RoundRecord> records);
std::vector<RoundRecord> load_records_csv(const std::filesystem::path& path);

nlohmann::json to_json(const RoundRecord& r);

}  // namespace threebox
