#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pgr/scene_graph.hpp"

namespace pgr {

// Word classes for the constrained description grammar.
enum class TokenClass { noun, attribute, relation };

// Vocabulary for the grammar parser. Entries may span several tokens
// ("traffic light", "in front of"); matching is longest-first.
class Lexicon {
public:
    static Lexicon defaults();

    // line-delimited "token<TAB>class", class in {noun, attribute, relation}
    static Lexicon parse(const std::string& text);
    static Lexicon load(const std::string& path);

    void add(const std::string& entry, TokenClass cls);

    // Longest entry of class cls starting at tokens[pos]; returns token count.
    std::size_t match(const std::vector<std::string>& tokens, std::size_t pos,
                      TokenClass cls) const;

    // entry tokens joined by single spaces
    std::string entry_at(const std::vector<std::string>& tokens, std::size_t pos,
                         std::size_t len) const;

    std::vector<std::string> entries(TokenClass cls) const;

private:
    // per class: normalized entry -> token count
    std::vector<std::vector<std::string>> entries_[3];
    std::size_t max_len_[3] = {1, 1, 1};
};

// One clause of the grammar:
//   article? attribute* noun (relation article? attribute* noun)?
struct NounPhrase {
    std::vector<std::string> attributes;
    std::string label;
};

struct DescriptionSentence {
    NounPhrase subject;
    std::optional<std::string> relation;  // present iff object present
    std::optional<NounPhrase> object;
};

// Parses sentences (separated by '.' or ';') against the lexicon.
// GrammarError carries sentence/token position; UnknownRelation fires when
// the relation slot holds text outside the relation vocabulary.
std::vector<DescriptionSentence> parse_sentences(const std::string& text, const Lexicon& lex);

// Full description -> validated SceneGraph. Mentions with identical
// normalized (label, attribute set) corefer to one node across sentences;
// relation clauses between a mention and itself are dropped rather than
// emitting self-loops.
SceneGraph parse_description(const std::string& text, const Lexicon& lex);

SceneGraph parse_description(const std::string& text);  // default lexicon

}  // namespace pgr
