#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fermikinetics/collision.hpp"

namespace fk {

inline constexpr const char* kToolVersion = "0.1.0";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Leading comment lines written at the top of every CSV.
struct Provenance {
    std::vector<std::string> lines;
};

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const Provenance& prov, const std::vector<std::string>& columns);
    CsvWriter& operator<<(double x);
    CsvWriter& operator<<(long long x);
    CsvWriter& operator<<(int x) { return *this << static_cast<long long>(x); }
    CsvWriter& operator<<(std::size_t x) { return *this << static_cast<long long>(x); }
    CsvWriter& operator<<(const std::string& s);
    void end_row();
    void close();
    ~CsvWriter();

private:
    void sep();
    std::string buf_;
    std::filesystem::path path_;
    bool row_start_ = true;
    bool closed_ = false;
};

// Shortest round-trip decimal form ("." separator, no locale).
std::string format_double(double x);

// Binary table layout, little-endian throughout:
//   char[4] "FKCT", u32 version, u32 dim, u32 n, u32 mode (0 mollified, 1 exact),
//   f64 eta, f64 lambda, f64 threshold, u64 count,
//   count x { u32 k, u32 l, u32 m, u32 p, f64 weight }   (logical entries, lexicographic)
inline constexpr std::uint32_t kTableFormatVersion = 1;
void write_table_binary(const std::filesystem::path& path, const CollisionTable& table);
CollisionTable read_table_binary(const std::filesystem::path& path);
void write_table_csv(const std::filesystem::path& path, const Provenance& prov, const CollisionTable& table);

}  // namespace fk
