// Plain-text formats. Numbers are written in the shortest form that parses
// back to the same double, so every export re-imports bit for bit.
//
// Mesh file:
//   perfplast-mesh 1
//   dim <d> nodes <n> cells <c> facets <f>
//   <x> <y>                       n lines
//   <a> <b> [<c>]                 c lines, dim + 1 node ids
//   <a> [<b>] <side> <tag>        f lines, dim node ids, side name, D or N
//
// Field CSV (header mandatory, LF endings):
//   P0: cell,s00[,s11,s01 | ,s11,s22,s01,s02,s12]
//   P1: node,u0[,u1]
// Series CSV prefixes a step column: k,cell,... or k,node,...
//
// Summary file: one "key = value" pair per line in insertion order.
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "perfplast/fem.hpp"

namespace perfplast::io {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_double(double v);
double parse_double(const std::string& s);

void write_mesh(const std::filesystem::path& p, const Mesh& m);
Mesh read_mesh(const std::filesystem::path& p);

void write_field_p0(const std::filesystem::path& p, int dim, const FieldP0& f);
FieldP0 read_field_p0(const std::filesystem::path& p, int dim);
void write_field_p1(const std::filesystem::path& p, int dim, const FieldP1& f);
FieldP1 read_field_p1(const std::filesystem::path& p, int dim);

void write_series_p0(const std::filesystem::path& p, int dim, const std::vector<FieldP0>& s);
std::vector<FieldP0> read_series_p0(const std::filesystem::path& p, int dim, int steps, int cells);
void write_series_p1(const std::filesystem::path& p, int dim, const std::vector<FieldP1>& s);
std::vector<FieldP1> read_series_p1(const std::filesystem::path& p, int dim, int steps, int nodes);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& p, const std::vector<std::string>& header);
    ~CsvWriter();
    void row(const std::vector<double>& values);
    void row_text(const std::vector<std::string>& values);

private:
    std::FILE* f_ = nullptr;
    std::size_t cols_ = 0;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    int column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& p);

class Summary {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);
    void set(const std::string& key, int value) { set(key, static_cast<long long>(value)); }
    void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    void write(const std::filesystem::path& p) const;
    static Summary read(const std::filesystem::path& p);
    std::string get(const std::string& key) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string sha256_file(const std::filesystem::path& p);

/// Hashes every regular file below `dir` (except the manifest itself) and
/// writes "<sha256>  <bytes>  <relative path>" lines sorted by path.
void write_manifest(const std::filesystem::path& dir, const std::string& name = "manifest.txt");

}  // namespace perfplast::io
