#include "raglab/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace raglab::text {
namespace {

bool is_space_byte(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

struct CpRange {
    char32_t lo;
    char32_t hi;
};

// Letter ranges of the major scripts. Code points outside ASCII and outside
// these ranges (punctuation, symbols, separators) split tokens.
constexpr std::array<CpRange, 25> kLetterRanges{{
    {0x00AA, 0x00AA},  // feminine ordinal
    {0x00B5, 0x00B5},  // micro sign
    {0x00BA, 0x00BA},  // masculine ordinal
    {0x00C0, 0x00D6},  // Latin-1 letters
    {0x00D8, 0x00F6},
    {0x00F8, 0x02C1},  // Latin Extended-A/B, IPA
    {0x0370, 0x0373},
    {0x0376, 0x0377},
    {0x037A, 0x037D},
    {0x037F, 0x037F},
    {0x0386, 0x0386},
    {0x0388, 0x03FF},  // Greek
    {0x0400, 0x0481},  // Cyrillic
    {0x048A, 0x052F},
    {0x0531, 0x0556},  // Armenian
    {0x0561, 0x0587},
    {0x05D0, 0x05EA},  // Hebrew
    {0x0620, 0x064A},  // Arabic
    {0x0660, 0x0669},  // Arabic-Indic digits
    {0x0671, 0x06D3},
    {0x0900, 0x097F},  // Devanagari
    {0x3040, 0x30FF},  // Hiragana, Katakana
    {0x4E00, 0x9FFF},  // CJK unified
    {0xAC00, 0xD7A3},  // Hangul
    {0xF900, 0xFAFF},  // CJK compatibility
}};

bool is_word_codepoint(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
               (cp >= 'A' && cp <= 'Z');
    }
    for (const auto& r : kLetterRanges) {
        if (cp >= r.lo && cp <= r.hi) return true;
        if (cp < r.lo) return false;
    }
    return false;
}

char32_t fold_codepoint(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    // Latin-1 uppercase block, skipping the multiplication sign.
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
    return cp;
}

// Decodes one UTF-8 code point at s[i]. Returns the number of bytes consumed
// (always >= 1); invalid sequences decode as U+FFFD and consume one byte.
std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t& cp) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        cp = b0;
        return 1;
    }
    auto cont = [&](std::size_t off) {
        return i + off < s.size() &&
               (static_cast<unsigned char>(s[i + off]) & 0xC0) == 0x80;
    };
    auto cb = [&](std::size_t off) {
        return static_cast<char32_t>(static_cast<unsigned char>(s[i + off]) & 0x3F);
    };
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        cp = ((b0 & 0x1Fu) << 6) | cb(1);
        if (cp >= 0x80) return 2;
    } else if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        cp = ((b0 & 0x0Fu) << 12) | (cb(1) << 6) | cb(2);
        if (cp >= 0x800) return 3;
    } else if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        cp = ((b0 & 0x07u) << 18) | (cb(1) << 12) | (cb(2) << 6) | cb(3);
        if (cp >= 0x10000 && cp <= 0x10FFFF) return 4;
    }
    cp = 0xFFFD;
    return 1;
}

void encode_utf8(char32_t cp, std::string& out) {
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

}  // namespace

std::vector<std::string_view> whitespace_words(std::string_view s) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space_byte(static_cast<unsigned char>(s[i]))) ++i;
        const std::size_t start = i;
        while (i < s.size() && !is_space_byte(static_cast<unsigned char>(s[i]))) ++i;
        if (i > start) words.push_back(s.substr(start, i - start));
    }
    return words;
}

int word_count(std::string_view s) {
    int n = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space_byte(static_cast<unsigned char>(s[i]))) ++i;
        if (i < s.size()) ++n;
        while (i < s.size() && !is_space_byte(static_cast<unsigned char>(s[i]))) ++i;
    }
    return n;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t i = 0;
    while (i < s.size()) {
        char32_t cp = 0;
        i += decode_utf8(s, i, cp);
        if (is_word_codepoint(cp)) {
            encode_utf8(fold_codepoint(cp), current);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string normalize(std::string_view s) {
    const auto tokens = tokenize(s);
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace raglab::text
