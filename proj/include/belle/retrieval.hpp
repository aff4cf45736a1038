#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace belle::retrieval {

struct Document {
    std::string id;
    std::string title;
    std::string text;

    friend bool operator==(const Document&, const Document&) = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct RetrievalResult {
    std::vector<std::pair<std::string, double>> hits;  // (doc id, score), score nonincreasing
    std::string query;
};

struct ScoredDocument {
    Document doc;
    double score = 0.0;
};

enum class RetrievalErrorKind { DuplicateId, EmptyCorpus, EmptyQuery, Io, Format };

class RetrievalError : public std::runtime_error {
public:
    RetrievalError(RetrievalErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    RetrievalErrorKind kind() const { return kind_; }

private:
    RetrievalErrorKind kind_;
};

/// Lowercases and splits on non-alphanumeric characters; empty tokens are
/// dropped. No stemming, no stopword removal.
std::vector<std::string> tokenize_text(std::string_view text);

/// Okapi BM25 inverted index. Documents are indexed as title + " " + text.
/// Immutable once built; safe for unlimited concurrent queries.
class RetrievalIndex {
public:
    static RetrievalIndex build(std::vector<Document> docs, Bm25Params params = {});

    /// BM25 score of one document for the given query terms. Duplicate
    /// query terms contribute once per occurrence.
    double score(const std::vector<std::string>& query_terms, std::size_t ordinal) const;

    /// Top-k documents by (score desc, id asc). Only documents containing at
    /// least one query term are ranked, so fewer than k hits may return.
    RetrievalResult retrieve(const std::string& query, int k) const;

    std::size_t doc_count() const { return docs_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    const Bm25Params& params() const { return params_; }
    const Document& doc(std::size_t ordinal) const { return docs_.at(ordinal); }
    std::size_t doc_length(std::size_t ordinal) const { return doc_lengths_.at(ordinal); }
    std::optional<std::size_t> ordinal_of(const std::string& id) const;
    std::size_t term_doc_freq(const std::string& term) const;
    std::size_t term_count() const { return postings_.size(); }

    nlohmann::ordered_json to_json() const;
    static RetrievalIndex from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static RetrievalIndex load(const std::filesystem::path& path);

private:
    RetrievalIndex() = default;

    // term -> [(doc ordinal, term frequency)], ordinals ascending
    std::map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    Bm25Params params_;
    std::vector<Document> docs_;
    std::map<std::string, std::size_t> id_to_ordinal_;
};

/// Loads a JSONL corpus, one {"id","title","text"} object per line.
std::vector<Document> load_corpus_jsonl(const std::filesystem::path& path);

/// Convenience wrapper: retrieve() plus document lookup.
std::vector<ScoredDocument> retrieve_docs(const RetrievalIndex& index, const std::string& query,
                                          int k);

/// Clamps an operator's requested candidate-document count into [3,10].
int clamp_k_docs(int k);

}  // namespace belle::retrieval
