#include "pgr/grammar.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "pgr/error.hpp"
#include "pgr/util.hpp"

namespace pgr {

namespace {

const std::set<std::string>& articles() {
    static const std::set<std::string> a = {"a", "an", "the"};
    return a;
}

// tokens tolerated between subject and relation ("building to the left of")
const std::set<std::string>& fillers() {
    static const std::set<std::string> f = {"is", "are", "to", "the"};
    return f;
}

std::vector<std::string> entry_tokens(const std::string& entry) { return tokenize(entry); }

}  // namespace

Lexicon Lexicon::defaults() {
    Lexicon lex;
    for (const char* n :
         {"building", "house", "tree", "mailbox", "road", "sign", "window", "door", "fence",
          "lamppost", "bench", "church", "tower", "bridge", "shop", "wall", "gate", "statue",
          "fountain", "hedge", "traffic light", "intersection", "sidewalk", "archway", "balcony",
          "chimney", "storefront", "awning", "billboard", "hydrant", "stairway", "pillar",
          "bus stop", "phone booth", "kiosk", "roundabout", "crosswalk", "planter", "railing",
          "garage"})
        lex.add(n, TokenClass::noun);
    for (const char* a :
         {"tall", "short", "narrow", "wide", "red", "white", "brick", "wooden", "stone", "glass",
          "metal", "old", "modern", "classical", "green", "blue", "arched", "pointed", "flat",
          "rusty", "painted", "dark", "light-colored", "yellow", "gray", "ornate", "plain",
          "curved", "square", "round", "weathered", "tiled", "slanted", "gilded", "faded",
          "striped", "massive", "tiny", "crooked", "polished"})
        lex.add(a, TokenClass::attribute);
    for (const char* r : {"left of", "right of", "in front of", "behind", "next to", "close by",
                          "on top of", "beside"})
        lex.add(r, TokenClass::relation);
    return lex;
}

Lexicon Lexicon::parse(const std::string& text) {
    Lexicon lex;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(text)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw SchemaError("lexicon line " + std::to_string(line_no) + ": expected <TAB>");
        std::string entry = line.substr(0, tab);
        std::string cls = normalize_text(line.substr(tab + 1));
        if (cls == "noun")
            lex.add(entry, TokenClass::noun);
        else if (cls == "attribute")
            lex.add(entry, TokenClass::attribute);
        else if (cls == "relation")
            lex.add(entry, TokenClass::relation);
        else
            throw SchemaError("lexicon line " + std::to_string(line_no) +
                              ": unknown class '" + cls + "'");
    }
    return lex;
}

Lexicon Lexicon::load(const std::string& path) { return parse(read_file(path)); }

void Lexicon::add(const std::string& entry, TokenClass cls) {
    auto toks = entry_tokens(entry);
    if (toks.empty()) throw SchemaError("empty lexicon entry");
    auto& bucket = entries_[static_cast<int>(cls)];
    if (std::find(bucket.begin(), bucket.end(), toks) == bucket.end()) {
        max_len_[static_cast<int>(cls)] = std::max(max_len_[static_cast<int>(cls)], toks.size());
        bucket.push_back(std::move(toks));
    }
}

std::size_t Lexicon::match(const std::vector<std::string>& tokens, std::size_t pos,
                           TokenClass cls) const {
    const auto& bucket = entries_[static_cast<int>(cls)];
    std::size_t limit = std::min(max_len_[static_cast<int>(cls)], tokens.size() - pos);
    for (std::size_t len = limit; len >= 1; --len) {
        for (const auto& entry : bucket) {
            if (entry.size() != len) continue;
            if (std::equal(entry.begin(), entry.end(), tokens.begin() + pos)) return len;
        }
    }
    return 0;
}

std::string Lexicon::entry_at(const std::vector<std::string>& tokens, std::size_t pos,
                              std::size_t len) const {
    std::string out;
    for (std::size_t i = 0; i < len; ++i) {
        if (i) out.push_back(' ');
        out += tokens[pos + i];
    }
    return out;
}

std::vector<std::string> Lexicon::entries(TokenClass cls) const {
    std::vector<std::string> out;
    for (const auto& e : entries_[static_cast<int>(cls)]) {
        std::string joined;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (i) joined.push_back(' ');
            joined += e[i];
        }
        out.push_back(joined);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

struct SentenceParser {
    const std::vector<std::string>& tokens;
    const Lexicon& lex;
    std::size_t sentence_no;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw GrammarError("sentence " + std::to_string(sentence_no) + ", token " +
                           std::to_string(pos + 1) + ": " + what);
    }

    bool done() const { return pos >= tokens.size(); }

    void skip_articles() {
        while (!done() && articles().count(tokens[pos])) ++pos;
    }

    NounPhrase noun_phrase() {
        skip_articles();
        NounPhrase np;
        for (;;) {
            if (done()) fail("expected a noun");
            std::size_t alen = lex.match(tokens, pos, TokenClass::attribute);
            if (alen > 0) {
                std::string attr = lex.entry_at(tokens, pos, alen);
                if (std::find(np.attributes.begin(), np.attributes.end(), attr) ==
                    np.attributes.end())
                    np.attributes.push_back(attr);
                pos += alen;
                continue;
            }
            std::size_t nlen = lex.match(tokens, pos, TokenClass::noun);
            if (nlen == 0) fail("unknown word '" + tokens[pos] + "'");
            np.label = lex.entry_at(tokens, pos, nlen);
            pos += nlen;
            return np;
        }
    }

    DescriptionSentence parse() {
        DescriptionSentence s;
        s.subject = noun_phrase();
        if (done()) return s;
        // tolerate "to the" / "is" between subject and relation
        while (!done() && fillers().count(tokens[pos]) &&
               lex.match(tokens, pos, TokenClass::relation) == 0)
            ++pos;
        if (done()) return s;
        std::size_t rlen = lex.match(tokens, pos, TokenClass::relation);
        if (rlen == 0)
            throw UnknownRelation("sentence " + std::to_string(sentence_no) + ", token " +
                                  std::to_string(pos + 1) + ": '" + tokens[pos] +
                                  "' is not a known relation");
        s.relation = lex.entry_at(tokens, pos, rlen);
        pos += rlen;
        s.object = noun_phrase();
        if (!done()) fail("unexpected trailing word '" + tokens[pos] + "'");
        return s;
    }
};

}  // namespace

std::vector<DescriptionSentence> parse_sentences(const std::string& text, const Lexicon& lex) {
    // split before normalization; '.' and ';' vanish once punctuation is stripped
    std::vector<std::string> raw;
    std::string cur;
    for (char c : text) {
        if (c == '.' || c == ';') {
            raw.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    raw.push_back(cur);

    std::vector<DescriptionSentence> out;
    std::size_t sentence_no = 0;
    for (const auto& chunk : raw) {
        auto tokens = tokenize(chunk);
        if (tokens.empty()) continue;
        ++sentence_no;
        SentenceParser p{tokens, lex, sentence_no};
        out.push_back(p.parse());
    }
    return out;
}

SceneGraph parse_description(const std::string& text, const Lexicon& lex) {
    auto sentences = parse_sentences(text, lex);

    SceneGraph g;
    // coreference key: label + sorted attribute set
    std::map<std::pair<std::string, std::vector<std::string>>, std::string> known;
    auto intern = [&](const NounPhrase& np) -> std::string {
        std::vector<std::string> sorted = np.attributes;
        std::sort(sorted.begin(), sorted.end());
        auto key = std::make_pair(np.label, std::move(sorted));
        auto it = known.find(key);
        if (it != known.end()) return it->second;
        std::string id = "n" + std::to_string(g.nodes.size());
        g.nodes.push_back({id, np.label, np.attributes});
        known.emplace(std::move(key), id);
        return id;
    };

    std::set<std::tuple<std::string, std::string, std::string>> edge_set;
    for (const auto& s : sentences) {
        std::string subj = intern(s.subject);
        if (!s.relation) continue;
        std::string obj = intern(*s.object);
        if (subj == obj) continue;  // same mention twice; no self-loop
        if (edge_set.insert({subj, obj, *s.relation}).second)
            g.edges.push_back({subj, obj, *s.relation});
    }
    g.meta["source"] = "grammar";
    validate(g);
    return g;
}

SceneGraph parse_description(const std::string& text) {
    return parse_description(text, Lexicon::defaults());
}

}  // namespace pgr
