#include "pivq/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace pivq {

namespace {

using nlohmann::json;

constexpr char kCodebookMagic[8] = {'P', 'I', 'V', 'Q', 'C', 'B', '1', '\0'};
constexpr char kEmbeddingMagic[8] = {'P', 'I', 'V', 'Q', 'E', 'M', '1', '\0'};

void expect_magic(std::istream& in, const char (&magic)[8], const char* what) {
    char got[8];
    if (!in.read(got, 8)) throw ParseError(std::string(what) + ": truncated header");
    if (std::memcmp(got, magic, 8) != 0) {
        throw ParseError(std::string(what) + ": bad magic bytes");
    }
}

}  // namespace

void write_u32_le(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

std::uint32_t read_u32_le(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw ParseError(std::string(what) + ": truncated");
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64_le(std::ostream& out, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

double read_f64_le(std::istream& in, const char* what) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) {
        throw ParseError(std::string(what) + ": truncated");
    }
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

std::string codebook_to_json(const Codebook& cb) {
    json j;
    j["dim"] = cb.dim;
    j["entries"] = cb.entries;
    return j.dump();
}

Codebook codebook_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("codebook json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("dim") || !j.contains("entries")) {
        throw ParseError("codebook json: expected object with dim and entries");
    }
    Codebook cb;
    try {
        cb.dim = j.at("dim").get<std::size_t>();
        cb.entries = j.at("entries").get<std::vector<Embedding>>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("codebook json: ") + e.what());
    }
    try {
        cb.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("codebook json: ") + e.what());
    }
    return cb;
}

void write_codebook_binary(std::ostream& out, const Codebook& cb) {
    cb.validate();
    out.write(kCodebookMagic, 8);
    write_u32_le(out, static_cast<std::uint32_t>(cb.entries.size()));
    write_u32_le(out, static_cast<std::uint32_t>(cb.dim));
    for (const Embedding& e : cb.entries) {
        for (double v : e) write_f64_le(out, v);
    }
}

Codebook read_codebook_binary(std::istream& in) {
    expect_magic(in, kCodebookMagic, "codebook binary");
    const std::uint32_t count = read_u32_le(in, "codebook binary");
    const std::uint32_t dim = read_u32_le(in, "codebook binary");
    if (count == 0) throw ParseError("codebook binary: K must be >= 1");
    Codebook cb;
    cb.dim = dim;
    cb.entries.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        cb.entries[i].resize(dim);
        for (std::uint32_t k = 0; k < dim; ++k) {
            cb.entries[i][k] = read_f64_le(in, "codebook binary");
        }
    }
    try {
        cb.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("codebook binary: ") + e.what());
    }
    return cb;
}

void write_coded_dataset(std::ostream& out, const std::vector<CodedSample>& samples) {
    for (const CodedSample& s : samples) {
        json j;
        j["id"] = s.id;
        j["codes"] = s.codes.codes();
        out << j.dump() << '\n';
    }
}

std::vector<CodedSample> read_coded_dataset(std::istream& in) {
    std::vector<CodedSample> samples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("coded dataset line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.contains("id") || !j.contains("codes")) {
            throw ParseError("coded dataset line " + std::to_string(lineno) +
                             ": expected id and codes");
        }
        if (!j.at("id").is_string() || !j.at("codes").is_array()) {
            throw ParseError("coded dataset line " + std::to_string(lineno) +
                             ": id must be a string and codes an array");
        }
        CodedSample s;
        s.id = j.at("id").get<std::string>();
        std::vector<std::uint32_t> raw;
        for (const json& c : j.at("codes")) {
            if (!c.is_number_integer() || c.get<long long>() < 0 ||
                c.get<long long>() > 0xFFFFFFFFLL) {
                throw ParseError("coded dataset line " + std::to_string(lineno) +
                                 ": codes must be integers in [0, 2^32)");
            }
            raw.push_back(c.get<std::uint32_t>());
        }
        try {
            s.codes = CodeSet::from_sorted_unique(std::move(raw));
        } catch (const std::invalid_argument& e) {
            throw ParseError("coded dataset line " + std::to_string(lineno) + ": " + e.what());
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

void write_embeddings_csv(std::ostream& out, const std::vector<Embedding>& embeddings) {
    std::ostringstream row;
    row.precision(17);
    for (const Embedding& e : embeddings) {
        row.str("");
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (i > 0) row << ',';
            row << e[i];
        }
        out << row.str() << '\n';
    }
}

std::vector<Embedding> read_embeddings_csv(std::istream& in) {
    std::vector<Embedding> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Embedding row;
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError("embeddings csv line " + std::to_string(lineno) +
                                 ": bad number '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError("embeddings csv line " + std::to_string(lineno) +
                             ": inconsistent column count");
        }
        if (row.empty()) {
            throw ParseError("embeddings csv line " + std::to_string(lineno) + ": empty row");
        }
        require_finite(row, "embeddings csv");
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_embeddings_binary(std::ostream& out, const std::vector<Embedding>& embeddings) {
    const std::size_t dim = embeddings.empty() ? 0 : embeddings.front().size();
    for (const Embedding& e : embeddings) {
        if (e.size() != dim) {
            throw std::invalid_argument("embeddings binary: inconsistent dimensions");
        }
    }
    out.write(kEmbeddingMagic, 8);
    write_u32_le(out, static_cast<std::uint32_t>(embeddings.size()));
    write_u32_le(out, static_cast<std::uint32_t>(dim));
    for (const Embedding& e : embeddings) {
        for (double v : e) write_f64_le(out, v);
    }
}

std::vector<Embedding> read_embeddings_binary(std::istream& in) {
    expect_magic(in, kEmbeddingMagic, "embeddings binary");
    const std::uint32_t count = read_u32_le(in, "embeddings binary");
    const std::uint32_t dim = read_u32_le(in, "embeddings binary");
    std::vector<Embedding> rows(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        rows[i].resize(dim);
        for (std::uint32_t k = 0; k < dim; ++k) {
            rows[i][k] = read_f64_le(in, "embeddings binary");
        }
        require_finite(rows[i], "embeddings binary");
    }
    return rows;
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::ifstream open_input(const std::string& path, std::ios::openmode mode) {
    std::ifstream in(path, mode);
    if (!in) throw ParseError("cannot open file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

}  // namespace

Codebook load_codebook(const std::string& path) {
    auto in = open_input(path, std::ios::binary);
    char head[8] = {};
    in.read(head, 8);
    in.clear();
    in.seekg(0);
    if (std::memcmp(head, kCodebookMagic, 8) == 0) {
        return read_codebook_binary(in);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return codebook_from_json(text.str());
}

void save_codebook(const std::string& path, const Codebook& cb) {
    if (has_suffix(path, ".json")) {
        auto out = open_output(path, std::ios::out);
        out << codebook_to_json(cb) << '\n';
    } else {
        auto out = open_output(path, std::ios::binary);
        write_codebook_binary(out, cb);
    }
}

std::vector<Embedding> load_embeddings(const std::string& path) {
    auto in = open_input(path, std::ios::binary);
    char head[8] = {};
    in.read(head, 8);
    in.clear();
    in.seekg(0);
    if (std::memcmp(head, kEmbeddingMagic, 8) == 0) {
        return read_embeddings_binary(in);
    }
    return read_embeddings_csv(in);
}

std::vector<CodedSample> load_coded_dataset(const std::string& path) {
    auto in = open_input(path, std::ios::in);
    return read_coded_dataset(in);
}

void save_coded_dataset(const std::string& path, const std::vector<CodedSample>& samples) {
    auto out = open_output(path, std::ios::out);
    write_coded_dataset(out, samples);
}

}  // namespace pivq
