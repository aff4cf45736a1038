#include "belle/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace belle::retrieval {

std::vector<std::string> tokenize_text(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

int clamp_k_docs(int k) { return std::clamp(k, 3, 10); }

RetrievalIndex RetrievalIndex::build(std::vector<Document> docs, Bm25Params params) {
    if (docs.empty()) throw RetrievalError(RetrievalErrorKind::EmptyCorpus, "empty corpus");

    RetrievalIndex index;
    index.params_ = params;
    index.docs_ = std::move(docs);

    for (std::size_t ordinal = 0; ordinal < index.docs_.size(); ++ordinal) {
        const Document& doc = index.docs_[ordinal];
        if (doc.text.empty())
            throw RetrievalError(RetrievalErrorKind::Format,
                                 "document '" + doc.id + "' has empty text");
        if (!index.id_to_ordinal_.emplace(doc.id, ordinal).second)
            throw RetrievalError(RetrievalErrorKind::DuplicateId,
                                 "duplicate document id '" + doc.id + "'");

        const auto terms = tokenize_text(doc.title + " " + doc.text);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));

        std::map<std::string, std::uint32_t> counts;
        for (const auto& term : terms) ++counts[term];
        for (const auto& [term, tf] : counts)
            index.postings_[term].emplace_back(static_cast<std::uint32_t>(ordinal), tf);
    }

    const auto total = std::accumulate(index.doc_lengths_.begin(), index.doc_lengths_.end(),
                                       std::uint64_t{0});
    index.avg_doc_length_ = static_cast<double>(total) / static_cast<double>(index.docs_.size());
    return index;
}

double RetrievalIndex::score(const std::vector<std::string>& query_terms,
                             std::size_t ordinal) const {
    const double n_docs = static_cast<double>(docs_.size());
    const double len = static_cast<double>(doc_lengths_.at(ordinal));
    double total = 0.0;
    for (const auto& term : query_terms) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& plist = it->second;
        const auto entry = std::lower_bound(
            plist.begin(), plist.end(), ordinal,
            [](const auto& p, std::size_t ord) { return p.first < ord; });
        if (entry == plist.end() || entry->first != ordinal) continue;

        const double df = static_cast<double>(plist.size());
        const double tf = static_cast<double>(entry->second);
        // Smoothed IDF; stays strictly positive even when every document
        // contains the term.
        const double idf = std::log((n_docs - df + 1.0) / (df + 0.5) + 1.0);
        const double norm = tf + params_.k1 * (1.0 - params_.b + params_.b * len / avg_doc_length_);
        total += idf * tf * (params_.k1 + 1.0) / norm;
    }
    return total;
}

RetrievalResult RetrievalIndex::retrieve(const std::string& query, int k) const {
    const auto terms = tokenize_text(query);
    if (terms.empty())
        throw RetrievalError(RetrievalErrorKind::EmptyQuery, "query has no tokens");

    // Accumulate per-document scores over the postings of each query term.
    std::map<std::uint32_t, double> scores;
    const double n_docs = static_cast<double>(docs_.size());
    for (const auto& term : terms) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log((n_docs - df + 1.0) / (df + 0.5) + 1.0);
        for (const auto& [ordinal, tf_raw] : it->second) {
            const double tf = static_cast<double>(tf_raw);
            const double len = static_cast<double>(doc_lengths_[ordinal]);
            const double norm =
                tf + params_.k1 * (1.0 - params_.b + params_.b * len / avg_doc_length_);
            scores[ordinal] += idf * tf * (params_.k1 + 1.0) / norm;
        }
    }

    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(scores.size());
    for (const auto& [ordinal, score] : scores) ranked.emplace_back(docs_[ordinal].id, score);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (k >= 0 && ranked.size() > static_cast<std::size_t>(k)) ranked.resize(k);

    return RetrievalResult{std::move(ranked), query};
}

std::optional<std::size_t> RetrievalIndex::ordinal_of(const std::string& id) const {
    const auto it = id_to_ordinal_.find(id);
    if (it == id_to_ordinal_.end()) return std::nullopt;
    return it->second;
}

std::size_t RetrievalIndex::term_doc_freq(const std::string& term) const {
    const auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

nlohmann::ordered_json RetrievalIndex::to_json() const {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["params"] = {{"k1", params_.k1}, {"b", params_.b}};
    auto& docs = j["docs"] = nlohmann::ordered_json::array();
    for (const auto& d : docs_)
        docs.push_back({{"id", d.id}, {"title", d.title}, {"text", d.text}});
    auto& postings = j["postings"] = nlohmann::ordered_json::object();
    for (const auto& [term, plist] : postings_) {
        auto& entry = postings[term] = nlohmann::ordered_json::array();
        for (const auto& [ordinal, tf] : plist) entry.push_back({ordinal, tf});
    }
    return j;
}

RetrievalIndex RetrievalIndex::from_json(const nlohmann::json& j) {
    if (j.value("format_version", 0) != 1)
        throw RetrievalError(RetrievalErrorKind::Format, "unsupported index format version");
    Bm25Params params;
    params.k1 = j.at("params").at("k1").get<double>();
    params.b = j.at("params").at("b").get<double>();
    std::vector<Document> docs;
    for (const auto& d : j.at("docs"))
        docs.push_back(Document{d.at("id").get<std::string>(), d.value("title", std::string{}),
                                d.at("text").get<std::string>()});
    // Rebuilding from the documents reproduces identical postings and keeps
    // the loader independent of the stored posting lists; they are compared
    // as a corruption check.
    RetrievalIndex index = build(std::move(docs), params);
    if (j.contains("postings") &&
        j.at("postings").size() != index.postings_.size())
        throw RetrievalError(RetrievalErrorKind::Format, "index postings do not match documents");
    return index;
}

void RetrievalIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw RetrievalError(RetrievalErrorKind::Io, "cannot write " + path.string());
    out << to_json().dump() << '\n';
}

RetrievalIndex RetrievalIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RetrievalError(RetrievalErrorKind::Io, "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw RetrievalError(RetrievalErrorKind::Format,
                             "bad index file " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

std::vector<Document> load_corpus_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RetrievalError(RetrievalErrorKind::Io, "cannot open corpus " + path.string());
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw RetrievalError(RetrievalErrorKind::Format,
                                 path.string() + ":" + std::to_string(line_no) +
                                     ": bad JSON: " + e.what());
        }
        if (!j.contains("id") || !j.contains("text"))
            throw RetrievalError(RetrievalErrorKind::Format,
                                 path.string() + ":" + std::to_string(line_no) +
                                     ": document needs id and text");
        docs.push_back(Document{j.at("id").get<std::string>(), j.value("title", std::string{}),
                                j.at("text").get<std::string>()});
    }
    return docs;
}

std::vector<ScoredDocument> retrieve_docs(const RetrievalIndex& index, const std::string& query,
                                          int k) {
    const auto result = index.retrieve(query, k);
    std::vector<ScoredDocument> out;
    out.reserve(result.hits.size());
    for (const auto& [id, score] : result.hits) {
        const auto ordinal = index.ordinal_of(id);
        out.push_back(ScoredDocument{index.doc(*ordinal), score});
    }
    return out;
}

}  // namespace belle::retrieval
