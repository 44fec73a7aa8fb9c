#include "fact5w/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fact5w/error.hpp"
#include "fact5w/io.hpp"
#include "fact5w/rng.hpp"
#include "fact5w/textstats.hpp"
#include "fact5w/unicode.hpp"

namespace fact5w::sim {

namespace {

/// n-gram as a single string key; tokens never contain whitespace, so the
/// unit separator cannot collide.
std::string ngram_key(std::span<const std::string> tokens, std::size_t start, std::size_t n) {
    std::string key;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            key.push_back('\x1f');
        }
        key += tokens[start + i];
    }
    return key;
}

std::unordered_map<std::string, int> ngram_counts(std::span<const std::string> tokens, std::size_t n) {
    std::unordered_map<std::string, int> counts;
    if (tokens.size() >= n) {
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            counts[ngram_key(tokens, i, n)] += 1;
        }
    }
    return counts;
}

std::vector<std::string> lower_tokens(std::string_view s) {
    std::vector<std::string> tokens = text::tokenize(s);
    for (std::string& tok : tokens) {
        tok = text::lower_copy(tok);
    }
    return tokens;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.empty() || b.empty()) {
        return 0;
    }
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> curr(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) {
                curr[j] = prev[j - 1] + 1;
            } else {
                curr[j] = std::max(prev[j], curr[j - 1]);
            }
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

} // namespace

double bleu4(std::string_view candidate, std::span<const std::string> references,
             const BleuOptions& options) {
    if (references.empty()) {
        throw DataError("bleu4 requires at least one reference");
    }
    const std::vector<std::string> cand = text::tokenize(candidate);
    const std::size_t c = cand.size();
    if (c == 0) {
        return 0.0;
    }

    std::vector<std::vector<std::string>> refs;
    refs.reserve(references.size());
    for (const std::string& r : references) {
        refs.push_back(text::tokenize(r));
    }

    double log_precision_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto cand_counts = ngram_counts(cand, n);
        std::unordered_map<std::string, int> clip;
        for (const auto& ref : refs) {
            for (const auto& [gram, count] : ngram_counts(ref, n)) {
                auto& best = clip[gram];
                best = std::max(best, count);
            }
        }
        long long matched = 0;
        for (const auto& [gram, count] : cand_counts) {
            const auto it = clip.find(gram);
            if (it != clip.end()) {
                matched += std::min(count, it->second);
            }
        }
        long long total = c >= n ? static_cast<long long>(c - n + 1) : 0;
        if (options.smoothing && n >= 2) {
            matched += 1;
            total += 1;
        }
        if (matched == 0 || total == 0) {
            return 0.0;
        }
        log_precision_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
    }

    // Brevity penalty against the closest-length reference, ties to shorter.
    std::size_t r = refs.front().size();
    for (const auto& ref : refs) {
        const auto diff = [&](std::size_t len) {
            return len > c ? len - c : c - len;
        };
        if (diff(ref.size()) < diff(r) || (diff(ref.size()) == diff(r) && ref.size() < r)) {
            r = ref.size();
        }
    }
    const double brevity =
        c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return brevity * std::exp(log_precision_sum / 4.0);
}

double rouge_l(std::string_view candidate, std::string_view reference) {
    const std::vector<std::string> a = text::tokenize(candidate);
    const std::vector<std::string> b = text::tokenize(reference);
    if (a.empty() || b.empty()) {
        return 0.0;
    }
    const double lcs = static_cast<double>(lcs_length(a, b));
    if (lcs == 0.0) {
        return 0.0;
    }
    const double precision = lcs / static_cast<double>(a.size());
    const double recall = lcs / static_cast<double>(b.size());
    return 2.0 * precision * recall / (precision + recall);
}

double fuzzy_ratio(std::string_view a, std::string_view b) {
    const std::u32string ua = text::decode_utf8(a);
    const std::u32string ub = text::decode_utf8(b);
    const std::size_t n = ua.size();
    const std::size_t m = ub.size();
    if (n == 0 && m == 0) {
        return 1.0;
    }
    std::vector<std::size_t> prev(m + 1);
    std::vector<std::size_t> curr(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        prev[j] = j;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        curr[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t subst = prev[j - 1] + (ua[i - 1] == ub[j - 1] ? 0 : 1);
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, subst});
        }
        std::swap(prev, curr);
    }
    const double distance = static_cast<double>(prev[m]);
    return 1.0 - distance / static_cast<double>(std::max(n, m));
}

// ---------------------------------------------------------------------------
// TfidfIndex
// ---------------------------------------------------------------------------

TfidfIndex TfidfIndex::fit(std::span<const std::string> corpus) {
    TfidfIndex index;
    index.doc_count_ = corpus.size();

    std::map<std::string, std::size_t> df; // ordered: deterministic indices
    std::uint64_t fp = kFnvOffset;
    for (const std::string& doc : corpus) {
        fp = fnv1a64_u64(doc.size(), fp);
        fp = fnv1a64(doc, fp);
        std::vector<std::string> tokens = lower_tokens(doc);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (const std::string& term : tokens) {
            df[term] += 1;
        }
    }
    index.fingerprint_ = io::checksum_hex(fp);
    index.idf_.reserve(df.size());
    int next = 0;
    const double n_docs = static_cast<double>(corpus.size());
    for (const auto& [term, count] : df) {
        index.vocab_.emplace(term, next++);
        index.idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    return index;
}

double TfidfIndex::idf_of(std::string_view term) const {
    const auto it = vocab_.find(std::string(term));
    return it == vocab_.end() ? 0.0 : idf_[static_cast<std::size_t>(it->second)];
}

std::unordered_map<int, double> TfidfIndex::project(std::string_view text) const {
    std::unordered_map<int, double> weights;
    for (const std::string& term : lower_tokens(text)) {
        const auto it = vocab_.find(term);
        if (it != vocab_.end()) {
            weights[it->second] += idf_[static_cast<std::size_t>(it->second)];
        }
    }
    return weights;
}

double TfidfIndex::cosine(std::string_view a, std::string_view b) const {
    const auto wa = project(a);
    const auto wb = project(b);
    if (wa.empty() || wb.empty()) {
        return 0.0;
    }
    double dot = 0.0;
    for (const auto& [term, weight] : wa) {
        const auto it = wb.find(term);
        if (it != wb.end()) {
            dot += weight * it->second;
        }
    }
    double na = 0.0;
    double nb = 0.0;
    for (const auto& [term, weight] : wa) {
        na += weight * weight;
    }
    for (const auto& [term, weight] : wb) {
        nb += weight * weight;
    }
    if (dot <= 0.0) {
        return 0.0;
    }
    return std::min(1.0, dot / std::sqrt(na * nb));
}

std::string TfidfIndex::to_text() const {
    std::string out = "fact5w-tfidf\tversion 1\n";
    out += "docs\t" + std::to_string(doc_count_) + "\n";
    out += "fingerprint\t" + fingerprint_ + "\n";
    std::vector<const std::string*> terms(vocab_.size());
    for (const auto& [term, idx] : vocab_) {
        terms[static_cast<std::size_t>(idx)] = &term;
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
        out += io::escape_cell(*terms[i]) + "\t" + io::format_double(idf_[i]) + "\n";
    }
    return out;
}

TfidfIndex TfidfIndex::from_text(std::string_view text, std::string_view source_name) {
    const std::vector<std::string> lines = io::split_lines(text);
    if (lines.size() < 3 || lines[0] != "fact5w-tfidf\tversion 1") {
        throw DataError(std::string(source_name) + ": not a tfidf index file");
    }
    TfidfIndex index;
    const auto docs = io::split_tsv_line(lines[1]);
    const auto fp = io::split_tsv_line(lines[2]);
    if (docs.size() != 2 || docs[0] != "docs" || fp.size() != 2 || fp[0] != "fingerprint") {
        throw DataError(std::string(source_name) + ": malformed tfidf header");
    }
    index.doc_count_ = static_cast<std::size_t>(io::parse_int(docs[1], "tfidf doc count"));
    index.fingerprint_ = fp[1];
    for (std::size_t i = 3; i < lines.size(); ++i) {
        const auto cells = io::split_tsv_line(lines[i]);
        if (cells.size() != 2) {
            throw DataError(std::string(source_name) + ": malformed tfidf row " + std::to_string(i + 1));
        }
        const int idx = static_cast<int>(index.idf_.size());
        const double idf = io::parse_double(cells[1], "idf");
        if (!(idf >= 0.0) || !std::isfinite(idf)) {
            throw DataError(std::string(source_name) + ": idf must be finite and >= 0");
        }
        if (!index.vocab_.emplace(io::unescape_cell(cells[0]), idx).second) {
            throw DataError(std::string(source_name) + ": duplicate term at row " + std::to_string(i + 1));
        }
        index.idf_.push_back(idf);
    }
    return index;
}

void TfidfIndex::save(const std::filesystem::path& path) const { io::atomic_write_file(path, to_text()); }

TfidfIndex TfidfIndex::load(const std::filesystem::path& path) {
    return from_text(io::read_file(path), path.string());
}

double tfidf_cosine(const TfidfIndex& index, std::string_view a, std::string_view b) {
    return index.cosine(a, b);
}

// ---------------------------------------------------------------------------
// Embedding cosine
// ---------------------------------------------------------------------------

double embedding_cosine(const emb::EmbeddingProvider& provider, const TextRef& a, const TextRef& b) {
    const emb::Matrix ma = provider.embed(a.sample_id, a.field, a.text);
    const emb::Matrix mb = provider.embed(b.sample_id, b.field, b.text);
    const Eigen::RowVectorXd pa = ma.colwise().mean();
    const Eigen::RowVectorXd pb = mb.colwise().mean();
    const double na = pa.norm();
    const double nb = pb.norm();
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(pa.dot(pb) / (na * nb), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Bundle
// ---------------------------------------------------------------------------

SimilarityBundle similarity_bundle(const corpus::Sample& sample, const TfidfIndex& tfidf,
                                   const emb::EmbeddingProvider& provider_a,
                                   const emb::EmbeddingProvider& provider_b) {
    const std::string ca = sample.claim_answers ? text::join_parts(*sample.claim_answers) : std::string();
    const std::string ea =
        sample.evidence_answers ? text::join_parts(*sample.evidence_answers) : std::string();

    const TextRef claim_ref{sample.id, emb::Field::Claim, sample.claim};
    const TextRef evidence_ref{sample.id, emb::Field::Evidence, sample.evidence};
    const TextRef ca_ref{sample.id, emb::Field::ClaimAnswer, ca};
    const TextRef ea_ref{sample.id, emb::Field::EvidenceAnswer, ea};

    // Both answer sides empty: the pair carries no signal, all its features
    // are 0 (this overrides fuzzy_ratio's empty-empty identity of 1).
    const bool answers_empty = ca.empty() && ea.empty();

    SimilarityBundle bundle;
    bundle.values[0] = embedding_cosine(provider_a, claim_ref, evidence_ref);
    bundle.values[1] = answers_empty ? 0.0 : embedding_cosine(provider_a, ca_ref, ea_ref);
    bundle.values[2] = embedding_cosine(provider_b, claim_ref, evidence_ref);
    bundle.values[3] = answers_empty ? 0.0 : embedding_cosine(provider_b, ca_ref, ea_ref);
    bundle.values[4] = fuzzy_ratio(sample.claim, sample.evidence);
    bundle.values[5] = answers_empty ? 0.0 : fuzzy_ratio(ca, ea);
    bundle.values[6] = tfidf.cosine(sample.claim, sample.evidence);
    bundle.values[7] = answers_empty ? 0.0 : tfidf.cosine(ca, ea);
    bundle.values[8] = rouge_l(sample.claim, sample.evidence);
    bundle.values[9] = answers_empty ? 0.0 : rouge_l(ca, ea);
    return bundle;
}

} // namespace fact5w::sim
