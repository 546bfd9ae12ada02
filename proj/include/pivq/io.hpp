// File formats: codebooks (JSON + binary), coded datasets (JSON Lines) and
// embedding datasets (CSV + binary). Binary formats are little-endian with
// fixed magic headers.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pivq/core.hpp"

namespace pivq {

/// Raised on malformed headers, truncated payloads or inconsistent shapes.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One coded sample: an id plus its code set.
struct CodedSample {
    std::string id;
    CodeSet codes;
};

// Little-endian scalar plumbing shared by all binary formats.
void write_u32_le(std::ostream& out, std::uint32_t v);
std::uint32_t read_u32_le(std::istream& in, const char* what = "binary");
void write_f64_le(std::ostream& out, double v);
double read_f64_le(std::istream& in, const char* what = "binary");

// Codebook, text format: {"dim": d, "entries": [[...], ...]}.
std::string codebook_to_json(const Codebook& cb);
Codebook codebook_from_json(const std::string& text);

// Codebook, binary format: "PIVQCB1\0", u32 K, u32 d, K*d little-endian f64.
void write_codebook_binary(std::ostream& out, const Codebook& cb);
Codebook read_codebook_binary(std::istream& in);

// Coded dataset: JSON Lines, one {"id": ..., "codes": [...]} per sample.
// Codes are emitted in canonical sorted order.
void write_coded_dataset(std::ostream& out, const std::vector<CodedSample>& samples);
std::vector<CodedSample> read_coded_dataset(std::istream& in);

// Embedding dataset, CSV: one row per embedding, d columns.
void write_embeddings_csv(std::ostream& out, const std::vector<Embedding>& embeddings);
std::vector<Embedding> read_embeddings_csv(std::istream& in);

// Embedding dataset, binary: "PIVQEM1\0", u32 count, u32 d, count*d f64.
void write_embeddings_binary(std::ostream& out, const std::vector<Embedding>& embeddings);
std::vector<Embedding> read_embeddings_binary(std::istream& in);

// Path helpers; binary vs text codebook is chosen by the magic bytes on
// read and by extension (".json" => text) on write.
Codebook load_codebook(const std::string& path);
void save_codebook(const std::string& path, const Codebook& cb);

// Embeddings: binary magic sniffed on read; ".csv" extension on write.
std::vector<Embedding> load_embeddings(const std::string& path);

std::vector<CodedSample> load_coded_dataset(const std::string& path);
void save_coded_dataset(const std::string& path, const std::vector<CodedSample>& samples);

}  // namespace pivq
