#pragma once

// TREC-format test collections: documents, topics, qrels, tokenization and
// per-language vocabularies.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace clir {

/// Short language code ("en", "hi", "bn"). Must be non-empty and must not
/// contain ':' or whitespace, since tagged tokens serialize as "lang:term".
using LangId = std::string;

class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void validate_lang_id(const LangId& code) {
    if (code.empty()) {
        throw std::invalid_argument("language code must be non-empty");
    }
    for (char c : code) {
        if (c == ':' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            throw std::invalid_argument("language code '" + code +
                                        "' contains ':' or whitespace");
        }
    }
}

using StopwordSet = std::unordered_set<std::string>;

namespace unicode {

/// Decodes the UTF-8 sequence starting at s[i], advancing i. Invalid bytes
/// decode as U+FFFD one byte at a time so malformed input degrades to
/// separators instead of aborting a parse.
inline char32_t decode(std::string_view s, std::size_t& i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + len > s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k < len; ++k) {
        unsigned char bk = static_cast<unsigned char>(s[i + k]);
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    i += len;
    return cp;
}

inline void encode(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

/// Token boundary classification. ASCII alphanumerics and all unlisted
/// non-ASCII code points (letters, digits and combining marks of every
/// script) are token characters; whitespace and the common punctuation
/// blocks separate. ZWNJ/ZWJ stay inside tokens because Indic orthography
/// uses them word-internally.
inline bool is_separator(char32_t cp) {
    if (cp < 0x80) {
        return !((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
                 (cp >= 'A' && cp <= 'Z'));
    }
    if (cp == 0x00A0) return true;                   // no-break space
    if (cp >= 0x00A1 && cp <= 0x00BF) return true;   // Latin-1 punctuation
    if (cp == 0x00D7 || cp == 0x00F7) return true;   // multiplication, division
    if (cp == 0x0964 || cp == 0x0965) return true;   // danda, double danda
    if (cp >= 0x2000 && cp <= 0x206F) {              // general punctuation
        return cp != 0x200C && cp != 0x200D;
    }
    if (cp >= 0x3000 && cp <= 0x303F) return true;   // CJK punctuation
    if (cp >= 0xFE50 && cp <= 0xFE6F) return true;   // small form variants
    if (cp >= 0xFF01 && cp <= 0xFF0F) return true;   // fullwidth punctuation
    if (cp >= 0xFF1A && cp <= 0xFF20) return true;
    if (cp >= 0xFF3B && cp <= 0xFF40) return true;
    if (cp >= 0xFF5B && cp <= 0xFF65) return true;
    return false;
}

/// ASCII plus Latin-1 lowercase mapping; scripts without case pass through.
inline char32_t fold_case(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
    return cp;
}

}  // namespace unicode

/// Splits on whitespace/punctuation boundaries, lowercases scripts with
/// case, and drops tokens found in the stopword set. Order is preserved.
/// Empty input yields an empty sequence.
inline std::vector<std::string> tokenize(std::string_view text,
                                         const StopwordSet& stopwords) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            if (stopwords.find(current) == stopwords.end()) {
                tokens.push_back(current);
            }
            current.clear();
        }
    };
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = unicode::decode(text, i);
        if (unicode::is_separator(cp) || cp == 0xFFFD) {
            flush();
        } else {
            unicode::encode(unicode::fold_case(cp), current);
        }
    }
    flush();
    return tokens;
}

/// One term per line; each line is normalized through the tokenizer so that
/// list entries match tokens byte-for-byte. An empty file is legal.
inline StopwordSet load_stopwords(std::istream& in) {
    StopwordSet stopwords;
    std::string line;
    while (std::getline(in, line)) {
        for (auto& term : tokenize(line, {})) {
            stopwords.insert(std::move(term));
        }
    }
    return stopwords;
}

inline StopwordSet load_stopwords_file(const std::string& path) {
    if (path.empty()) {
        return {};
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open stopword file: " + path);
    }
    return load_stopwords(in);
}

struct Document {
    std::string doc_id;
    LangId lang;
    std::vector<std::string> tokens;  // normalized, stopwords removed

    std::size_t raw_length() const { return tokens.size(); }
};

struct Query {
    int query_id = 0;
    LangId lang;
    std::vector<std::string> title_tokens;
};

/// Binary relevance judgments: (query_id, doc_id) -> {0, 1}. Graded input
/// collapses at relevance > 0. Unjudged documents are simply absent.
class Qrels {
  public:
    void add(int query_id, const std::string& doc_id, int relevance) {
        by_query_[query_id][doc_id] = relevance > 0 ? 1 : 0;
    }

    const std::map<std::string, int>* judgments(int query_id) const {
        auto it = by_query_.find(query_id);
        return it == by_query_.end() ? nullptr : &it->second;
    }

    std::set<std::string> relevant_docs(int query_id) const {
        return docs_with_label(query_id, 1);
    }

    std::set<std::string> nonrelevant_docs(int query_id) const {
        return docs_with_label(query_id, 0);
    }

    const std::map<int, std::map<std::string, int>>& by_query() const {
        return by_query_;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& [qid, docs] : by_query_) n += docs.size();
        return n;
    }

  private:
    std::set<std::string> docs_with_label(int query_id, int label) const {
        std::set<std::string> out;
        if (const auto* j = judgments(query_id)) {
            for (const auto& [doc, rel] : *j) {
                if (rel == label) out.insert(doc);
            }
        }
        return out;
    }

    std::map<int, std::map<std::string, int>> by_query_;
};

/// One language's documents, queries, judgments and vocabulary.
/// Immutable after construction; safe for concurrent reads.
struct TestCollection {
    LangId lang;
    std::vector<Document> documents;
    std::vector<Query> queries;
    Qrels qrels;
    std::map<std::string, std::uint64_t> vocabulary;  // term -> collection freq
    std::uint64_t total_tokens = 0;

    const Document* find_document(const std::string& doc_id) const {
        auto it = doc_index_.find(doc_id);
        return it == doc_index_.end() ? nullptr : &documents[it->second];
    }

    const Query* find_query(int query_id) const {
        auto it = query_index_.find(query_id);
        return it == query_index_.end() ? nullptr : &queries[it->second];
    }

    /// The relevant set for a query restricted to documents actually present
    /// in the collection, sorted by doc id.
    std::vector<std::string> relevant_present(int query_id) const {
        std::vector<std::string> out;
        for (const auto& doc_id : qrels.relevant_docs(query_id)) {
            if (find_document(doc_id) != nullptr) {
                out.push_back(doc_id);
            }
        }
        return out;
    }

    friend TestCollection make_test_collection(LangId lang,
                                               std::vector<Document> documents,
                                               std::vector<Query> queries,
                                               Qrels qrels);

  private:
    std::unordered_map<std::string, std::size_t> doc_index_;
    std::unordered_map<int, std::size_t> query_index_;
};

inline TestCollection make_test_collection(LangId lang,
                                           std::vector<Document> documents,
                                           std::vector<Query> queries,
                                           Qrels qrels) {
    validate_lang_id(lang);
    TestCollection col;
    col.lang = std::move(lang);
    col.documents = std::move(documents);
    col.queries = std::move(queries);
    col.qrels = std::move(qrels);
    for (std::size_t i = 0; i < col.documents.size(); ++i) {
        const Document& d = col.documents[i];
        if (!col.doc_index_.emplace(d.doc_id, i).second) {
            throw std::invalid_argument("duplicate doc id: " + d.doc_id);
        }
        for (const auto& t : d.tokens) {
            ++col.vocabulary[t];
        }
        col.total_tokens += d.tokens.size();
    }
    for (std::size_t i = 0; i < col.queries.size(); ++i) {
        if (!col.query_index_.emplace(col.queries[i].query_id, i).second) {
            throw std::invalid_argument(
                "duplicate query id: " +
                std::to_string(col.queries[i].query_id));
        }
    }
    return col;
}

namespace trec {

inline std::string read_all(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

/// Text content of the first <tag>...</tag> element after `from`, or nullopt.
/// The opening tag may carry attributes; a missing closing tag ends the
/// element at the next '<'.
inline std::optional<std::string> element_text(std::string_view block,
                                               std::string_view tag,
                                               std::size_t from = 0) {
    std::string open = "<" + std::string(tag);
    std::size_t p = block.find(open, from);
    while (p != std::string_view::npos) {
        char after = p + open.size() < block.size() ? block[p + open.size()] : '\0';
        if (after == '>' || after == ' ' || after == '\t' || after == '\n' ||
            after == '\r') {
            break;
        }
        p = block.find(open, p + 1);
    }
    if (p == std::string_view::npos) return std::nullopt;
    std::size_t gt = block.find('>', p);
    if (gt == std::string_view::npos) return std::nullopt;
    std::size_t start = gt + 1;
    std::string close = "</" + std::string(tag) + ">";
    std::size_t end = block.find(close, start);
    if (end == std::string_view::npos) {
        end = block.find('<', start);
        if (end == std::string_view::npos) end = block.size();
    }
    return std::string(block.substr(start, end - start));
}

}  // namespace trec

/// Parses TREC SGML document records (<DOC>, <DOCNO>, <TEXT>). Multiple
/// <TEXT> fields within one record concatenate. Errors name byte offsets.
inline std::vector<Document> parse_trec_documents(std::istream& in,
                                                  const LangId& lang,
                                                  const StopwordSet& stopwords) {
    validate_lang_id(lang);
    const std::string data = trec::read_all(in);
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::size_t pos = 0;
    while (true) {
        std::size_t start = data.find("<DOC>", pos);
        if (start == std::string::npos) break;
        std::size_t end = data.find("</DOC>", start);
        if (end == std::string::npos) {
            throw ParseError("unterminated <DOC> record at byte " +
                             std::to_string(start));
        }
        std::string_view block(data.data() + start, end - start);
        auto docno = trec::element_text(block, "DOCNO");
        if (!docno) {
            throw ParseError("record at byte " + std::to_string(start) +
                             " is missing <DOCNO>");
        }
        std::string doc_id = trec::trim(*docno);
        if (doc_id.empty()) {
            throw ParseError("record at byte " + std::to_string(start) +
                             " has an empty <DOCNO>");
        }
        if (!seen.insert(doc_id).second) {
            throw ParseError("duplicate DOCNO '" + doc_id + "'");
        }
        std::string text;
        std::size_t tpos = 0;
        while (auto chunk = trec::element_text(block, "TEXT", tpos)) {
            if (!text.empty()) text.push_back('\n');
            text += *chunk;
            std::size_t next = block.find("<TEXT", tpos);
            next = block.find("</TEXT>", next);
            if (next == std::string_view::npos) break;
            tpos = next + 7;
        }
        Document d;
        d.doc_id = std::move(doc_id);
        d.lang = lang;
        d.tokens = tokenize(text, stopwords);
        docs.push_back(std::move(d));
        pos = end + 6;
    }
    return docs;
}

/// Serializes documents back to TREC SGML, one token-joined <TEXT> per
/// record. Re-parsing the output reproduces the token sequences exactly.
inline void write_trec_documents(std::ostream& out,
                                 const std::vector<Document>& docs) {
    for (const auto& d : docs) {
        out << "<DOC>\n<DOCNO>" << d.doc_id << "</DOCNO>\n<TEXT>\n";
        for (std::size_t i = 0; i < d.tokens.size(); ++i) {
            if (i) out << ' ';
            out << d.tokens[i];
        }
        out << "\n</TEXT>\n</DOC>\n";
    }
}

/// Parses TREC topics (<top>, <num>, <title>); only the title is kept.
/// Accepts both "<num>26</num>" and the classic "<num> Number: 26" style.
inline std::vector<Query> parse_topics(std::istream& in, const LangId& lang,
                                       const StopwordSet& stopwords) {
    validate_lang_id(lang);
    const std::string data = trec::read_all(in);
    std::vector<Query> queries;
    std::size_t pos = 0;
    while (true) {
        std::size_t start = data.find("<top", pos);
        if (start == std::string::npos) break;
        std::size_t end = data.find("</top>", start);
        if (end == std::string::npos) {
            throw ParseError("unterminated <top> block at byte " +
                             std::to_string(start));
        }
        std::string_view block(data.data() + start, end - start);
        const std::string where = "topic block at byte " + std::to_string(start);

        auto num_text = trec::element_text(block, "num");
        if (!num_text) {
            throw ParseError(where + ": missing <num>");
        }
        std::string num = trec::trim(*num_text);
        if (num.rfind("Number:", 0) == 0) {
            num = trec::trim(num.substr(7));
        }
        int query_id = 0;
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(),
                                       query_id);
        if (ec != std::errc() || p != num.data() + num.size()) {
            throw ParseError(where + ": invalid <num> value '" + num + "'");
        }

        auto title_text = trec::element_text(block, "title");
        if (!title_text) {
            throw ParseError(where + ": missing <title>");
        }
        std::string title = trec::trim(*title_text);
        if (title.rfind("Topic:", 0) == 0) {
            title = trec::trim(title.substr(6));
        }
        Query q;
        q.query_id = query_id;
        q.lang = lang;
        q.title_tokens = tokenize(title, stopwords);
        if (q.title_tokens.empty()) {
            throw ParseError(where + ": topic " + std::to_string(query_id) +
                             " has an empty title after tokenization");
        }
        queries.push_back(std::move(q));
        pos = end + 6;
    }
    return queries;
}

/// Serializes queries as a TREC topics file (num + title).
inline void write_topics(std::ostream& out, const std::vector<Query>& queries) {
    for (const auto& q : queries) {
        out << "<top>\n<num>" << q.query_id << "</num>\n<title>";
        for (std::size_t i = 0; i < q.title_tokens.size(); ++i) {
            if (i) out << ' ';
            out << q.title_tokens[i];
        }
        out << "</title>\n</top>\n";
    }
}

/// Parses whitespace-separated "qid 0 docno rel" qrels lines. Relevance > 0
/// collapses to 1. Errors carry line numbers.
inline Qrels parse_qrels(std::istream& in) {
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::vector<std::string> cols;
        std::string col;
        while (ss >> col) cols.push_back(col);
        if (cols.empty()) continue;
        if (cols.size() != 4) {
            throw ParseError("qrels line " + std::to_string(line_no) +
                             ": expected 4 columns, got " +
                             std::to_string(cols.size()));
        }
        auto parse_int = [&](const std::string& s, const char* what) {
            int v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size()) {
                throw ParseError("qrels line " + std::to_string(line_no) +
                                 ": non-integer " + what + " '" + s + "'");
            }
            return v;
        };
        int qid = parse_int(cols[0], "query id");
        int rel = parse_int(cols[3], "relevance");
        qrels.add(qid, cols[2], rel);
    }
    return qrels;
}

/// Checks that query ids align across languages: every id is held by either
/// exactly one language or all of them. Returns the sorted ids shared by all
/// languages; partial alignment is rejected.
inline std::vector<int> validate_query_alignment(
    const std::vector<TestCollection>& collections) {
    std::map<int, std::size_t> holders;
    for (const auto& col : collections) {
        for (const auto& q : col.queries) {
            ++holders[q.query_id];
        }
    }
    std::vector<int> shared;
    const std::size_t n = collections.size();
    for (const auto& [qid, count] : holders) {
        if (count != 1 && count != n) {
            throw std::runtime_error(
                "query " + std::to_string(qid) + " is present in " +
                std::to_string(count) + " of " + std::to_string(n) +
                " languages (partial alignment)");
        }
        if (count == n) shared.push_back(qid);
    }
    return shared;
}

/// Loads one language's collection from TREC-format files. An empty
/// stopwords path means no stopword removal.
inline TestCollection load_test_collection(const LangId& lang,
                                           const std::string& docs_path,
                                           const std::string& topics_path,
                                           const std::string& qrels_path,
                                           const std::string& stopwords_path) {
    StopwordSet stopwords = load_stopwords_file(stopwords_path);
    auto open = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw std::runtime_error("cannot open file: " + path);
        }
        return in;
    };
    std::ifstream docs_in = open(docs_path);
    std::ifstream topics_in = open(topics_path);
    std::ifstream qrels_in = open(qrels_path);
    return make_test_collection(lang,
                                parse_trec_documents(docs_in, lang, stopwords),
                                parse_topics(topics_in, lang, stopwords),
                                parse_qrels(qrels_in));
}

}  // namespace clir
