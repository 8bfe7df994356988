#include "fermikinetics/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fermikinetics/errors.hpp"

namespace fk {

std::string sha256_hex(const std::string& bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw NumericalFailure("sha256: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ResourceError("cannot read " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

std::string format_double(double x)
{
    char b[64];
    auto r = std::to_chars(b, b + sizeof b, x);
    return std::string(b, r.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const Provenance& prov, const std::vector<std::string>& columns)
    : path_(path)
{
    for (const auto& l : prov.lines) buf_ += "# " + l + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) buf_ += (i ? "," : "") + columns[i];
    buf_ += "\n";
}

void CsvWriter::sep()
{
    if (!row_start_) buf_ += ',';
    row_start_ = false;
}

CsvWriter& CsvWriter::operator<<(double x)
{
    sep();
    buf_ += format_double(x);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long x)
{
    sep();
    buf_ += std::to_string(x);
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s)
{
    sep();
    if (s.find_first_of(",\"\n") == std::string::npos) {
        buf_ += s;
    } else {
        buf_ += '"';
        for (char c : s) {
            if (c == '"') buf_ += '"';
            buf_ += c;
        }
        buf_ += '"';
    }
    return *this;
}

void CsvWriter::end_row()
{
    buf_ += "\n";
    row_start_ = true;
}

void CsvWriter::close()
{
    if (closed_) return;
    closed_ = true;
    std::ofstream out(path_, std::ios::binary);
    if (!out) throw ResourceError("cannot write " + path_.string());
    out << buf_;
}

CsvWriter::~CsvWriter()
{
    try {
        close();
    } catch (...) {
    }
}

namespace {
template <class T>
void put_le(std::string& out, T v)
{
    std::uint64_t bits = 0;
    if constexpr (std::is_floating_point_v<T>) {
        static_assert(sizeof(T) == 8);
        std::memcpy(&bits, &v, 8);
    } else {
        bits = static_cast<std::uint64_t>(v);
    }
    for (std::size_t i = 0; i < sizeof(T); ++i) out += static_cast<char>((bits >> (8 * i)) & 0xff);
}

template <class T>
T get_le(const std::string& in, std::size_t& pos)
{
    if (pos + sizeof(T) > in.size()) throw ConfigError("collision table file is truncated");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += sizeof(T);
    if constexpr (std::is_floating_point_v<T>) {
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    } else {
        return static_cast<T>(bits);
    }
}
}  // namespace

void write_table_binary(const std::filesystem::path& path, const CollisionTable& table)
{
    auto entries = table.entries();
    std::string out = "FKCT";
    put_le<std::uint32_t>(out, kTableFormatVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.grid().dim()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.grid().n()));
    put_le<std::uint32_t>(out, table.mode() == ShellMode::mollified ? 0u : 1u);
    put_le<double>(out, table.eta());
    put_le<double>(out, table.lambda());
    put_le<double>(out, table.threshold());
    put_le<std::uint64_t>(out, entries.size());
    for (const auto& e : entries) {
        put_le<std::uint32_t>(out, e.k);
        put_le<std::uint32_t>(out, e.l);
        put_le<std::uint32_t>(out, e.m);
        put_le<std::uint32_t>(out, e.p);
        put_le<double>(out, e.weight);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ResourceError("cannot write " + path.string());
    f << out;
}

CollisionTable read_table_binary(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read collision table " + path.string());
    std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (in.size() < 4 || in.compare(0, 4, "FKCT") != 0) throw ConfigError("not a collision table file: " + path.string());
    std::size_t pos = 4;
    auto version = get_le<std::uint32_t>(in, pos);
    if (version != kTableFormatVersion) throw ConfigError("unsupported collision table version");
    int dim = static_cast<int>(get_le<std::uint32_t>(in, pos));
    int n = static_cast<int>(get_le<std::uint32_t>(in, pos));
    auto mode = get_le<std::uint32_t>(in, pos) == 0 ? ShellMode::mollified : ShellMode::exact_shell;
    double eta = get_le<double>(in, pos);
    double lambda = get_le<double>(in, pos);
    double threshold = get_le<double>(in, pos);
    auto count = get_le<std::uint64_t>(in, pos);
    MomentumGrid g = build_grid(dim, n);
    std::vector<CollisionEntry> entries;
    entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        CollisionEntry e;
        e.k = get_le<std::uint32_t>(in, pos);
        e.l = get_le<std::uint32_t>(in, pos);
        e.m = get_le<std::uint32_t>(in, pos);
        e.p = get_le<std::uint32_t>(in, pos);
        e.weight = get_le<double>(in, pos);
        entries.push_back(e);
    }
    return CollisionTable::from_entries(g, mode, eta, lambda, threshold, entries);
}

void write_table_csv(const std::filesystem::path& path, const Provenance& prov, const CollisionTable& table)
{
    CsvWriter w(path, prov, {"k", "l", "m", "p", "weight"});
    for (const auto& e : table.entries()) {
        w << static_cast<long long>(e.k) << static_cast<long long>(e.l) << static_cast<long long>(e.m)
          << static_cast<long long>(e.p) << e.weight;
        w.end_row();
    }
    w.close();
}

}  // namespace fk
