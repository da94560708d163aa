#include "ragkit/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace ragkit::sparse {

namespace {

// Distinct query terms in first-occurrence order. Both the per-chunk
// scorers and search() iterate terms in this order so their floating
// point sums are bit-identical.
std::vector<std::string> distinct_terms(const std::vector<text::Token>& tokens) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& t : tokens) {
        if (seen.insert(t).second) out.push_back(t);
    }
    return out;
}

double idf_paper_eq3(std::size_t n_docs, std::size_t doc_freq) {
    return std::log(static_cast<double>(n_docs) / (static_cast<double>(doc_freq) + 1.0));
}

double idf_robertson(std::size_t n_docs, std::size_t doc_freq) {
    double n = static_cast<double>(n_docs);
    double df = static_cast<double>(doc_freq);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double bm25_term(double tf, double idf, double doc_len, double avg_len, const Bm25Params& p) {
    double norm = p.k1 * (1.0 - p.b + p.b * doc_len / avg_len);
    return idf * (tf * (p.k1 + 1.0)) / (tf + norm);
}

const Posting* find_posting(const std::vector<Posting>& list, std::uint32_t doc) {
    auto it = std::lower_bound(list.begin(), list.end(), doc,
                               [](const Posting& p, std::uint32_t d) { return p.doc < d; });
    if (it == list.end() || it->doc != doc) return nullptr;
    return &*it;
}

// --- binary I/O helpers (little-endian) ------------------------------------

void put_u8(std::ostream& out, std::uint8_t v) {
    out.put(static_cast<char>(v));
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 4);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(buf, 8);
}

void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint8_t get_u8(std::istream& in) {
    int c = in.get();
    if (c == EOF) throw std::runtime_error("index file truncated");
    return static_cast<std::uint8_t>(c);
}

std::uint32_t get_u32(std::istream& in) {
    char buf[4];
    if (!in.read(buf, 4)) throw std::runtime_error("index file truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
}

double get_f64(std::istream& in) {
    char buf[8];
    if (!in.read(buf, 8)) throw std::runtime_error("index file truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

std::string get_string(std::istream& in) {
    std::uint32_t len = get_u32(in);
    std::string s(len, '\0');
    if (len > 0 && !in.read(s.data(), static_cast<std::streamsize>(len))) {
        throw std::runtime_error("index file truncated");
    }
    return s;
}

constexpr char kMagic[4] = {'S', 'P', 'I', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

InvertedIndex InvertedIndex::build(const corpus::Corpus& corpus, text::AnalysisChain chain) {
    if (corpus.chunks.empty()) {
        throw std::invalid_argument("build: empty corpus");
    }
    InvertedIndex index;
    index.chain_ = std::move(chain);
    std::size_t total_len = 0;
    std::unordered_set<std::string> seen_ids;
    for (const auto& chunk : corpus.chunks) {
        if (!seen_ids.insert(chunk.id).second) {
            throw std::invalid_argument("build: duplicate chunk id \"" + chunk.id + "\"");
        }
    }
    for (const auto& chunk : corpus.chunks) {
        auto tokens = text::analyze(chunk.text, index.chain_);
        if (tokens.empty()) {
            index.warnings_.push_back("chunk \"" + chunk.id + "\" has no analyzable tokens; excluded");
            continue;
        }
        auto doc = static_cast<std::uint32_t>(index.docs_.size());
        index.docs_.push_back({chunk.id, static_cast<std::uint32_t>(tokens.size())});
        total_len += tokens.size();
        for (std::uint32_t pos = 0; pos < tokens.size(); ++pos) {
            auto& list = index.postings_[tokens[pos]];
            if (list.empty() || list.back().doc != doc) {
                list.push_back({doc, 0, {}});
            }
            list.back().term_freq += 1;
            list.back().positions.push_back(pos);
        }
    }
    if (index.docs_.empty()) {
        throw std::invalid_argument("build: every chunk analyzed to zero tokens");
    }
    index.avg_length_ = static_cast<double>(total_len) / static_cast<double>(index.docs_.size());
    index.rebuild_doc_lookup();
    return index;
}

void InvertedIndex::rebuild_doc_lookup() {
    doc_lookup_.clear();
    doc_lookup_.reserve(docs_.size());
    for (std::uint32_t i = 0; i < docs_.size(); ++i) {
        doc_lookup_.emplace(docs_[i].chunk_id, i);
    }
}

std::size_t InvertedIndex::doc_frequency(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

bool InvertedIndex::contains(const std::string& chunk_id) const {
    return doc_lookup_.count(chunk_id) > 0;
}

std::uint32_t InvertedIndex::doc_index(const std::string& chunk_id) const {
    auto it = doc_lookup_.find(chunk_id);
    if (it == doc_lookup_.end()) {
        throw std::out_of_range("unknown chunk id: " + chunk_id);
    }
    return it->second;
}

double tfidf_score(const InvertedIndex& index, const std::string& query,
                   const std::string& chunk_id) {
    std::uint32_t doc = index.doc_index(chunk_id);
    double doc_len = index.docs()[doc].length;
    double score = 0.0;
    for (const auto& term : distinct_terms(text::analyze(query, index.chain()))) {
        auto it = index.postings().find(term);
        if (it == index.postings().end()) continue;
        const Posting* p = find_posting(it->second, doc);
        if (p == nullptr) continue;
        double tf = static_cast<double>(p->term_freq) / doc_len;
        score += tf * idf_paper_eq3(index.doc_count(), it->second.size());
    }
    return score;
}

double bm25_score(const InvertedIndex& index, const std::string& query,
                  const std::string& chunk_id, const Bm25Params& params) {
    std::uint32_t doc = index.doc_index(chunk_id);
    double doc_len = index.docs()[doc].length;
    double score = 0.0;
    for (const auto& term : distinct_terms(text::analyze(query, index.chain()))) {
        auto it = index.postings().find(term);
        if (it == index.postings().end()) continue;
        const Posting* p = find_posting(it->second, doc);
        if (p == nullptr) continue;
        double idf = params.idf_variant == IdfVariant::PaperEq3
                         ? idf_paper_eq3(index.doc_count(), it->second.size())
                         : idf_robertson(index.doc_count(), it->second.size());
        score += bm25_term(p->term_freq, idf, doc_len, index.avg_length(), params);
    }
    return score;
}

RankedList search(const InvertedIndex& index, const std::string& query, std::size_t k,
                  const Scorer& scorer) {
    if (k == 0) {
        throw std::invalid_argument("search: k must be >= 1");
    }
    auto terms = distinct_terms(text::analyze(query, index.chain()));
    if (terms.empty()) {
        throw std::invalid_argument("search: query analyzes to no tokens");
    }
    // Term-at-a-time accumulation. Per-document addition order matches the
    // per-chunk scorers, so results agree with exhaustive scoring exactly.
    std::unordered_map<std::uint32_t, double> acc;
    for (const auto& term : terms) {
        auto it = index.postings().find(term);
        if (it == index.postings().end()) continue;
        double idf = 0.0;
        if (scorer.kind == Scorer::Kind::TfIdf) {
            idf = idf_paper_eq3(index.doc_count(), it->second.size());
        } else {
            idf = scorer.bm25.idf_variant == IdfVariant::PaperEq3
                      ? idf_paper_eq3(index.doc_count(), it->second.size())
                      : idf_robertson(index.doc_count(), it->second.size());
        }
        for (const Posting& p : it->second) {
            double doc_len = index.docs()[p.doc].length;
            double contribution =
                scorer.kind == Scorer::Kind::TfIdf
                    ? (static_cast<double>(p.term_freq) / doc_len) * idf
                    : bm25_term(p.term_freq, idf, doc_len, index.avg_length(), scorer.bm25);
            acc[p.doc] += contribution;
        }
    }
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(acc.size());
    for (const auto& [doc, score] : acc) {
        bool eligible = scorer.kind == Scorer::Kind::TfIdf ? score != 0.0 : score > 0.0;
        if (eligible) scored.emplace_back(index.docs()[doc].chunk_id, score);
    }
    return make_ranked_list(std::move(scored), k);
}

RankedList phrase_search(const InvertedIndex& index, const std::string& phrase, std::size_t k,
                         const Bm25Params& params) {
    if (k == 0) {
        throw std::invalid_argument("phrase_search: k must be >= 1");
    }
    auto terms = text::analyze(phrase, index.chain());
    if (terms.empty()) {
        throw std::invalid_argument("phrase_search: phrase analyzes to no tokens");
    }
    // Intersect postings over the phrase terms, then verify adjacency via
    // positions: term i must appear at p + i for some start p.
    std::vector<const std::vector<Posting>*> lists;
    for (const auto& term : terms) {
        auto it = index.postings().find(term);
        if (it == index.postings().end()) return RankedList{{}, k};
        lists.push_back(&it->second);
    }
    std::vector<std::pair<std::string, double>> scored;
    for (const Posting& first : *lists[0]) {
        std::vector<const Posting*> per_term{&first};
        bool all_present = true;
        for (std::size_t i = 1; i < lists.size(); ++i) {
            const Posting* p = find_posting(*lists[i], first.doc);
            if (p == nullptr) {
                all_present = false;
                break;
            }
            per_term.push_back(p);
        }
        if (!all_present) continue;
        bool adjacent = false;
        for (std::uint32_t start : first.positions) {
            bool ok = true;
            for (std::size_t i = 1; i < per_term.size(); ++i) {
                const auto& pos = per_term[i]->positions;
                if (!std::binary_search(pos.begin(), pos.end(), start + static_cast<std::uint32_t>(i))) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                adjacent = true;
                break;
            }
        }
        if (!adjacent) continue;
        const std::string& id = index.docs()[first.doc].chunk_id;
        scored.emplace_back(id, bm25_score(index, phrase, id, params));
    }
    return make_ranked_list(std::move(scored), k);
}

void InvertedIndex::save(std::ostream& out) const {
    out.write(kMagic, 4);
    put_u32(out, kFormatVersion);
    put_u8(out, chain_.lowercase ? 1 : 0);
    put_u8(out, chain_.stem ? 1 : 0);
    std::vector<std::string> stopwords(chain_.stopwords.begin(), chain_.stopwords.end());
    std::sort(stopwords.begin(), stopwords.end());
    put_u32(out, static_cast<std::uint32_t>(stopwords.size()));
    for (const auto& w : stopwords) put_string(out, w);
    put_u32(out, static_cast<std::uint32_t>(docs_.size()));
    for (const auto& d : docs_) {
        put_string(out, d.chunk_id);
        put_u32(out, d.length);
    }
    put_f64(out, avg_length_);
    put_u32(out, static_cast<std::uint32_t>(postings_.size()));
    for (const auto& [term, list] : postings_) {
        put_string(out, term);
        put_u32(out, static_cast<std::uint32_t>(list.size()));
        for (const auto& p : list) {
            put_u32(out, p.doc);
            put_u32(out, p.term_freq);
            for (auto pos : p.positions) put_u32(out, pos);
        }
    }
    put_u32(out, static_cast<std::uint32_t>(warnings_.size()));
    for (const auto& w : warnings_) put_string(out, w);
    if (!out) throw std::runtime_error("failed writing index");
}

InvertedIndex InvertedIndex::load(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("not an index file (bad magic)");
    }
    std::uint32_t version = get_u32(in);
    if (version != kFormatVersion) {
        throw std::runtime_error("unsupported index format version " + std::to_string(version));
    }
    InvertedIndex index;
    index.chain_.lowercase = get_u8(in) != 0;
    index.chain_.stem = get_u8(in) != 0;
    std::uint32_t n_stop = get_u32(in);
    for (std::uint32_t i = 0; i < n_stop; ++i) index.chain_.stopwords.insert(get_string(in));
    std::uint32_t n_docs = get_u32(in);
    index.docs_.reserve(n_docs);
    for (std::uint32_t i = 0; i < n_docs; ++i) {
        DocEntry d;
        d.chunk_id = get_string(in);
        d.length = get_u32(in);
        index.docs_.push_back(std::move(d));
    }
    index.avg_length_ = get_f64(in);
    std::uint32_t n_terms = get_u32(in);
    for (std::uint32_t t = 0; t < n_terms; ++t) {
        std::string term = get_string(in);
        std::uint32_t n_postings = get_u32(in);
        std::vector<Posting> list;
        list.reserve(n_postings);
        for (std::uint32_t i = 0; i < n_postings; ++i) {
            Posting p;
            p.doc = get_u32(in);
            p.term_freq = get_u32(in);
            if (p.doc >= n_docs) throw std::runtime_error("index file corrupt: bad doc ref");
            p.positions.reserve(p.term_freq);
            for (std::uint32_t f = 0; f < p.term_freq; ++f) p.positions.push_back(get_u32(in));
            list.push_back(std::move(p));
        }
        index.postings_.emplace(std::move(term), std::move(list));
    }
    std::uint32_t n_warn = get_u32(in);
    for (std::uint32_t i = 0; i < n_warn; ++i) index.warnings_.push_back(get_string(in));
    index.rebuild_doc_lookup();
    return index;
}

void InvertedIndex::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save(out);
}

InvertedIndex InvertedIndex::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open index file: " + path);
    return load(in);
}

}  // namespace ragkit::sparse
