#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sq/text.hpp"

namespace sq {

/// Porter (1980) suffix-stripping stemmer, original algorithm. Operates on
/// lowercase ASCII words; anything else is returned unchanged.
class porter_stemmer {
  public:
    std::string stem(std::string_view word) const
    {
        if (word.size() <= 2) return std::string(word);
        for (char c : word)
            if (c < 'a' || c > 'z') return std::string(word);
        state s{std::string(word)};
        s.k = static_cast<int>(s.b.size()) - 1;
        step1ab(s);
        if (s.k > 0) {
            step1c(s);
            step2(s);
            step3(s);
            step4(s);
            step5(s);
        }
        return s.b.substr(0, s.k + 1);
    }

  private:
    struct state {
        std::string b;
        int k = 0;
        int j = 0;
    };

    static bool cons(const state& s, int i)
    {
        switch (s.b[i]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 ? true : !cons(s, i - 1);
            default: return true;
        }
    }

    // number of VC sequences in b[0..j]
    static int m(const state& s)
    {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > s.j) return n;
            if (!cons(s, i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > s.j) return n;
                if (cons(s, i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > s.j) return n;
                if (!cons(s, i)) break;
                ++i;
            }
            ++i;
        }
    }

    static bool vowel_in_stem(const state& s)
    {
        for (int i = 0; i <= s.j; ++i)
            if (!cons(s, i)) return true;
        return false;
    }

    static bool doublec(const state& s, int j)
    {
        if (j < 1 || s.b[j] != s.b[j - 1]) return false;
        return cons(s, j);
    }

    // consonant-vowel-consonant ending at i, final consonant not w, x or y
    static bool cvc(const state& s, int i)
    {
        if (i < 2 || !cons(s, i) || cons(s, i - 1) || !cons(s, i - 2)) return false;
        char ch = s.b[i];
        return !(ch == 'w' || ch == 'x' || ch == 'y');
    }

    static bool ends(state& s, std::string_view suffix)
    {
        int len = static_cast<int>(suffix.size());
        if (len > s.k + 1) return false;
        if (std::string_view(s.b).substr(s.k - len + 1, len) != suffix) return false;
        s.j = s.k - len;
        return true;
    }

    static void setto(state& s, std::string_view rep)
    {
        s.b.replace(s.j + 1, s.k - s.j, rep);
        s.k = s.j + static_cast<int>(rep.size());
        s.b.resize(s.k + 1);
    }

    static void r(state& s, std::string_view rep)
    {
        if (m(s) > 0) setto(s, rep);
    }

    static void step1ab(state& s)
    {
        if (s.b[s.k] == 's') {
            if (ends(s, "sses")) s.k -= 2;
            else if (ends(s, "ies")) setto(s, "i");
            else if (s.b[s.k - 1] != 's') --s.k;
        }
        if (ends(s, "eed")) {
            if (m(s) > 0) --s.k;
        } else if ((ends(s, "ed") || ends(s, "ing")) && vowel_in_stem(s)) {
            s.k = s.j;
            if (ends(s, "at")) setto(s, "ate");
            else if (ends(s, "bl")) setto(s, "ble");
            else if (ends(s, "iz")) setto(s, "ize");
            else if (doublec(s, s.k)) {
                --s.k;
                char ch = s.b[s.k];
                if (ch == 'l' || ch == 's' || ch == 'z') ++s.k;
            } else if (m_at(s, s.k) == 1 && cvc(s, s.k)) {
                s.j = s.k;
                setto(s, "e");
            }
        }
        s.b.resize(s.k + 1);
    }

    static int m_at(state& s, int j)
    {
        int saved = s.j;
        s.j = j;
        int v = m(s);
        s.j = saved;
        return v;
    }

    static void step1c(state& s)
    {
        if (ends(s, "y") && vowel_in_stem(s)) s.b[s.k] = 'i';
    }

    static void step2(state& s)
    {
        if (s.k < 1) return;
        switch (s.b[s.k - 1]) {
            case 'a':
                if (ends(s, "ational")) { r(s, "ate"); break; }
                if (ends(s, "tional")) { r(s, "tion"); break; }
                break;
            case 'c':
                if (ends(s, "enci")) { r(s, "ence"); break; }
                if (ends(s, "anci")) { r(s, "ance"); break; }
                break;
            case 'e':
                if (ends(s, "izer")) { r(s, "ize"); break; }
                break;
            case 'l':
                if (ends(s, "abli")) { r(s, "able"); break; }
                if (ends(s, "alli")) { r(s, "al"); break; }
                if (ends(s, "entli")) { r(s, "ent"); break; }
                if (ends(s, "eli")) { r(s, "e"); break; }
                if (ends(s, "ousli")) { r(s, "ous"); break; }
                break;
            case 'o':
                if (ends(s, "ization")) { r(s, "ize"); break; }
                if (ends(s, "ation")) { r(s, "ate"); break; }
                if (ends(s, "ator")) { r(s, "ate"); break; }
                break;
            case 's':
                if (ends(s, "alism")) { r(s, "al"); break; }
                if (ends(s, "iveness")) { r(s, "ive"); break; }
                if (ends(s, "fulness")) { r(s, "ful"); break; }
                if (ends(s, "ousness")) { r(s, "ous"); break; }
                break;
            case 't':
                if (ends(s, "aliti")) { r(s, "al"); break; }
                if (ends(s, "iviti")) { r(s, "ive"); break; }
                if (ends(s, "biliti")) { r(s, "ble"); break; }
                break;
            default: break;
        }
    }

    static void step3(state& s)
    {
        switch (s.b[s.k]) {
            case 'e':
                if (ends(s, "icate")) { r(s, "ic"); break; }
                if (ends(s, "ative")) { r(s, ""); break; }
                if (ends(s, "alize")) { r(s, "al"); break; }
                break;
            case 'i':
                if (ends(s, "iciti")) { r(s, "ic"); break; }
                break;
            case 'l':
                if (ends(s, "ical")) { r(s, "ic"); break; }
                if (ends(s, "ful")) { r(s, ""); break; }
                break;
            case 's':
                if (ends(s, "ness")) { r(s, ""); break; }
                break;
            default: break;
        }
    }

    static void step4(state& s)
    {
        if (s.k < 1) return;
        switch (s.b[s.k - 1]) {
            case 'a': if (ends(s, "al")) break; return;
            case 'c': if (ends(s, "ance") || ends(s, "ence")) break; return;
            case 'e': if (ends(s, "er")) break; return;
            case 'i': if (ends(s, "ic")) break; return;
            case 'l': if (ends(s, "able") || ends(s, "ible")) break; return;
            case 'n':
                if (ends(s, "ant") || ends(s, "ement") || ends(s, "ment") || ends(s, "ent")) break;
                return;
            case 'o':
                if (ends(s, "ion") && s.j >= 0 && (s.b[s.j] == 's' || s.b[s.j] == 't')) break;
                if (ends(s, "ou")) break;
                return;
            case 's': if (ends(s, "ism")) break; return;
            case 't': if (ends(s, "ate") || ends(s, "iti")) break; return;
            case 'u': if (ends(s, "ous")) break; return;
            case 'v': if (ends(s, "ive")) break; return;
            case 'z': if (ends(s, "ize")) break; return;
            default: return;
        }
        if (m(s) > 1) s.k = s.j;
    }

    static void step5(state& s)
    {
        s.j = s.k;
        if (s.b[s.k] == 'e') {
            int a = m_at(s, s.k - 1);
            if (a > 1 || (a == 1 && !cvc(s, s.k - 1))) --s.k;
        }
        if (s.b[s.k] == 'l' && doublec(s, s.k) && m_at(s, s.k - 1) > 1) --s.k;
    }
};

/// The default English stopword set of the Lucene/Anserini analyzer.
inline const std::set<std::string>& english_stopwords()
{
    static const std::set<std::string> s{"a",    "an",   "and",  "are",  "as",    "at",   "be",   "but",  "by",
                                         "for",  "if",   "in",   "into", "is",    "it",   "no",   "not",  "of",
                                         "on",   "or",   "such", "that", "the",   "their", "then", "there",
                                         "these", "they", "this", "to",  "was",   "will", "with"};
    return s;
}

struct TokenizerConfig {
    bool lowercase = true;
    std::set<std::string> stopword_list;
    bool stemming = false;

    /// Lowercase, Lucene English stopwords, Porter stemming.
    static TokenizerConfig analyzer_default()
    {
        return {true, english_stopwords(), true};
    }

    /// Lowercase split only.
    static TokenizerConfig plain() { return {true, {}, false}; }

    friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

/// Splits on runs of non-alphanumeric bytes (UTF-8 multibyte sequences are
/// kept inside words), then lowercases, removes stopwords, and stems as configured.
inline std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config)
{
    static const porter_stemmer stemmer;
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !text::is_word_byte(text[i])) ++i;
        std::size_t j = i;
        while (j < text.size() && text::is_word_byte(text[j])) ++j;
        if (j > i) {
            std::string term(text.substr(i, j - i));
            if (config.lowercase) term = text::to_lower(term);
            if (!config.stopword_list.count(term)) {
                if (config.stemming) term = stemmer.stem(term);
                out.push_back(std::move(term));
            }
        }
        i = j;
    }
    return out;
}

}  // namespace sq
