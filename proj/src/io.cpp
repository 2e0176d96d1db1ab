#include "perfplast/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace perfplast::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc()) throw FormatError("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (b != e && *b == '+') ++b;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) throw FormatError("not a number: '" + s + "'");
    return v;
}

namespace {

int parse_int(const std::string& s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("not an integer: '" + s + "'");
    return v;
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw FormatError("cannot open " + p.string());
    return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::vector<std::string> tensor_header(int dim) {
    switch (dim) {
        case 1: return {"s00"};
        case 2: return {"s00", "s11", "s01"};
        case 3: return {"s00", "s11", "s22", "s01", "s02", "s12"};
    }
    throw FormatError("tensor_header: dim must be 1, 2 or 3");
}

std::vector<std::string> vector_header(int dim) {
    std::vector<std::string> h;
    for (int i = 0; i < dim; ++i) h.push_back("u" + std::to_string(i));
    return h;
}

const char* side_name(Side s) {
    switch (s) {
        case kLeft: return "left";
        case kRight: return "right";
        case kBottom: return "bottom";
        case kTop: return "top";
        default: return "?";
    }
}

Side parse_side(const std::string& s) {
    if (s == "left") return kLeft;
    if (s == "right") return kRight;
    if (s == "bottom") return kBottom;
    if (s == "top") return kTop;
    throw FormatError("unknown side '" + s + "'");
}

void expect_header(const CsvTable& t, const std::vector<std::string>& want, const fs::path& p) {
    if (t.header != want) throw FormatError(p.string() + ": unexpected header");
}

}  // namespace

void write_mesh(const fs::path& p, const Mesh& m) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw FormatError("cannot write " + p.string());
    out << "perfplast-mesh 1\n";
    out << "dim " << m.dim() << " nodes " << m.num_nodes() << " cells " << m.num_cells() << " facets "
        << m.facets().size() << "\n";
    for (const auto& x : m.nodes()) out << format_double(x[0]) << " " << format_double(x[1]) << "\n";
    for (const auto& c : m.cells()) {
        for (int k = 0; k < m.nodes_per_cell(); ++k) out << (k ? " " : "") << c[k];
        out << "\n";
    }
    for (const auto& f : m.facets()) {
        for (int k = 0; k < m.dim(); ++k) out << f.nodes[k] << " ";
        out << side_name(f.side) << " " << (f.tag == BoundaryTag::Dirichlet ? "D" : "N") << "\n";
    }
}

Mesh read_mesh(const fs::path& p) {
    std::ifstream in = open_in(p);
    std::string magic, version;
    in >> magic >> version;
    if (magic != "perfplast-mesh" || version != "1") throw FormatError(p.string() + ": not a perfplast mesh file");
    std::string kd, kn, kc, kf, sd, sn, sc, sf;
    in >> kd >> sd >> kn >> sn >> kc >> sc >> kf >> sf;
    if (kd != "dim" || kn != "nodes" || kc != "cells" || kf != "facets") throw FormatError(p.string() + ": bad header");
    const int dim = parse_int(sd), nn = parse_int(sn), nc = parse_int(sc), nf = parse_int(sf);
    if (dim != 1 && dim != 2) throw FormatError(p.string() + ": dim must be 1 or 2");
    std::vector<std::array<double, 2>> nodes(nn);
    for (auto& x : nodes) {
        std::string a, b;
        in >> a >> b;
        x = {parse_double(a), parse_double(b)};
    }
    std::vector<std::array<int, 3>> cells(nc, {-1, -1, -1});
    for (auto& c : cells) {
        for (int k = 0; k < dim + 1; ++k) {
            std::string s;
            in >> s;
            c[k] = parse_int(s);
        }
    }
    std::vector<BoundaryFacet> facets(nf);
    for (auto& f : facets) {
        f.nodes = {-1, -1};
        for (int k = 0; k < dim; ++k) {
            std::string s;
            in >> s;
            f.nodes[k] = parse_int(s);
        }
        std::string side, tag;
        in >> side >> tag;
        f.side = parse_side(side);
        if (tag != "D" && tag != "N") throw FormatError(p.string() + ": facet tag must be D or N");
        f.tag = tag == "D" ? BoundaryTag::Dirichlet : BoundaryTag::Neumann;
    }
    if (!in) throw FormatError(p.string() + ": truncated mesh file");
    return Mesh(dim, std::move(nodes), std::move(cells), std::move(facets));
}

CsvWriter::CsvWriter(const fs::path& p, const std::vector<std::string>& header) : cols_(header.size()) {
    f_ = std::fopen(p.string().c_str(), "wb");
    if (!f_) throw FormatError("cannot write " + p.string());
    row_text(header);
}

CsvWriter::~CsvWriter() {
    if (f_) std::fclose(f_);
}

void CsvWriter::row(const std::vector<double>& values) {
    std::vector<std::string> s;
    s.reserve(values.size());
    for (double v : values) s.push_back(format_double(v));
    row_text(s);
}

void CsvWriter::row_text(const std::vector<std::string>& values) {
    if (values.size() != cols_) throw FormatError("CsvWriter: row has wrong number of columns");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) std::fputc(',', f_);
        std::fputs(values[i].c_str(), f_);
    }
    std::fputc('\n', f_);
}

int CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw FormatError("missing column '" + name + "'");
    return static_cast<int>(it - header.begin());
}

CsvTable read_csv(const fs::path& p) {
    std::ifstream in = open_in(p);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw FormatError(p.string() + ": empty CSV");
    t.header = split(line, ',');
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto r = split(line, ',');
        if (r.size() != t.header.size()) throw FormatError(p.string() + ": ragged row");
        t.rows.push_back(std::move(r));
    }
    return t;
}

void write_field_p0(const fs::path& p, int dim, const FieldP0& f) {
    std::vector<std::string> h{"cell"};
    for (auto& s : tensor_header(dim)) h.push_back(s);
    CsvWriter w(p, h);
    for (std::size_t c = 0; c < f.size(); ++c) {
        std::vector<std::string> r{std::to_string(c)};
        for (double v : f[c].components()) r.push_back(format_double(v));
        w.row_text(r);
    }
}

FieldP0 read_field_p0(const fs::path& p, int dim) {
    const CsvTable t = read_csv(p);
    std::vector<std::string> h{"cell"};
    for (auto& s : tensor_header(dim)) h.push_back(s);
    expect_header(t, h, p);
    FieldP0 f(t.rows.size(), SymTensor::zero(dim));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const int c = parse_int(t.rows[i][0]);
        if (c != static_cast<int>(i)) throw FormatError(p.string() + ": cells must be listed in order");
        for (int k = 0; k < SymTensor::num_components(dim); ++k) f[i][k] = parse_double(t.rows[i][k + 1]);
    }
    return f;
}

void write_field_p1(const fs::path& p, int dim, const FieldP1& f) {
    std::vector<std::string> h{"node"};
    for (auto& s : vector_header(dim)) h.push_back(s);
    CsvWriter w(p, h);
    for (Eigen::Index a = 0; a < f.size() / dim; ++a) {
        std::vector<std::string> r{std::to_string(a)};
        for (int i = 0; i < dim; ++i) r.push_back(format_double(f[a * dim + i]));
        w.row_text(r);
    }
}

FieldP1 read_field_p1(const fs::path& p, int dim) {
    const CsvTable t = read_csv(p);
    std::vector<std::string> h{"node"};
    for (auto& s : vector_header(dim)) h.push_back(s);
    expect_header(t, h, p);
    FieldP1 f(static_cast<Eigen::Index>(t.rows.size()) * dim);
    for (std::size_t a = 0; a < t.rows.size(); ++a) {
        if (parse_int(t.rows[a][0]) != static_cast<int>(a)) throw FormatError(p.string() + ": nodes must be listed in order");
        for (int i = 0; i < dim; ++i) f[static_cast<Eigen::Index>(a) * dim + i] = parse_double(t.rows[a][i + 1]);
    }
    return f;
}

void write_series_p0(const fs::path& p, int dim, const std::vector<FieldP0>& s) {
    std::vector<std::string> h{"k", "cell"};
    for (auto& c : tensor_header(dim)) h.push_back(c);
    CsvWriter w(p, h);
    for (std::size_t k = 0; k < s.size(); ++k) {
        for (std::size_t c = 0; c < s[k].size(); ++c) {
            std::vector<std::string> r{std::to_string(k), std::to_string(c)};
            for (double v : s[k][c].components()) r.push_back(format_double(v));
            w.row_text(r);
        }
    }
}

std::vector<FieldP0> read_series_p0(const fs::path& p, int dim, int steps, int cells) {
    const CsvTable t = read_csv(p);
    std::vector<std::string> h{"k", "cell"};
    for (auto& c : tensor_header(dim)) h.push_back(c);
    expect_header(t, h, p);
    std::vector<FieldP0> s(steps, FieldP0(cells, SymTensor::zero(dim)));
    std::vector<char> seen(static_cast<std::size_t>(steps) * cells, 0);
    for (const auto& r : t.rows) {
        const int k = parse_int(r[0]), c = parse_int(r[1]);
        if (k < 0 || k >= steps || c < 0 || c >= cells) throw FormatError(p.string() + ": index out of range");
        for (int i = 0; i < SymTensor::num_components(dim); ++i) s[k][c][i] = parse_double(r[i + 2]);
        seen[static_cast<std::size_t>(k) * cells + c] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw FormatError(p.string() + ": missing entries");
    return s;
}

void write_series_p1(const fs::path& p, int dim, const std::vector<FieldP1>& s) {
    std::vector<std::string> h{"k", "node"};
    for (auto& c : vector_header(dim)) h.push_back(c);
    CsvWriter w(p, h);
    for (std::size_t k = 0; k < s.size(); ++k) {
        for (Eigen::Index a = 0; a < s[k].size() / dim; ++a) {
            std::vector<std::string> r{std::to_string(k), std::to_string(a)};
            for (int i = 0; i < dim; ++i) r.push_back(format_double(s[k][a * dim + i]));
            w.row_text(r);
        }
    }
}

std::vector<FieldP1> read_series_p1(const fs::path& p, int dim, int steps, int nodes) {
    const CsvTable t = read_csv(p);
    std::vector<std::string> h{"k", "node"};
    for (auto& c : vector_header(dim)) h.push_back(c);
    expect_header(t, h, p);
    std::vector<FieldP1> s(steps, FieldP1::Zero(static_cast<Eigen::Index>(nodes) * dim));
    std::vector<char> seen(static_cast<std::size_t>(steps) * nodes, 0);
    for (const auto& r : t.rows) {
        const int k = parse_int(r[0]), a = parse_int(r[1]);
        if (k < 0 || k >= steps || a < 0 || a >= nodes) throw FormatError(p.string() + ": index out of range");
        for (int i = 0; i < dim; ++i) s[k][static_cast<Eigen::Index>(a) * dim + i] = parse_double(r[i + 2]);
        seen[static_cast<std::size_t>(k) * nodes + a] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw FormatError(p.string() + ": missing entries");
    return s;
}

void Summary::set(const std::string& key, const std::string& value) {
    if (key.empty() || key.find_first_of(" =\n") != std::string::npos) throw FormatError("Summary: bad key '" + key + "'");
    if (value.find('\n') != std::string::npos) throw FormatError("Summary: value for '" + key + "' has a newline");
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void Summary::set(const std::string& key, double value) { set(key, format_double(value)); }
void Summary::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

std::string Summary::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    throw FormatError("Summary: no key '" + key + "'");
}

void Summary::write(const fs::path& p) const {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw FormatError("cannot write " + p.string());
    for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
}

Summary Summary::read(const fs::path& p) {
    std::ifstream in = open_in(p);
    Summary s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto pos = line.find(" = ");
        if (pos == std::string::npos) throw FormatError(p.string() + ": expected 'key = value'");
        s.set(line.substr(0, pos), line.substr(pos + 3));
    }
    return s;
}

std::string sha256_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw FormatError("cannot open " + p.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

void write_manifest(const fs::path& dir, const std::string& name) {
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string rel = fs::relative(e.path(), dir).generic_string();
        if (rel == name) continue;
        files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw FormatError("cannot write manifest in " + dir.string());
    for (const auto& rel : files) {
        out << sha256_file(dir / rel) << "  " << fs::file_size(dir / rel) << "  " << rel << "\n";
    }
}

}  // namespace perfplast::io
