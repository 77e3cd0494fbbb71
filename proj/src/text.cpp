#include "context_drift/text.hpp"

#include <algorithm>
#include <cctype>

namespace context_drift::text {

namespace {

bool is_space(char c) noexcept { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) {
            ++i;
        }
        const std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) {
            ++i;
        }
        if (i > start) {
            out.push_back(s.substr(start, i - start));
        }
    }
    return out;
}

std::size_t count_ws_tokens(std::string_view s) noexcept {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : s) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t nl = s.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < s.size()) {
                out.push_back(s.substr(start));
            }
            break;
        }
        std::string_view line = s.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        out.push_back(line);
        start = nl + 1;
    }
    return out;
}

std::vector<std::string_view> split_sentences(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        std::string_view piece = trim(s.substr(start, end - start));
        if (!piece.empty()) {
            out.push_back(piece);
        }
        start = end;
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '.' || c == '?' || c == '!') {
            flush(i + 1);
        } else if (c == '\n') {
            flush(i);
            start = i + 1;
        }
    }
    flush(s.size());
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

bool is_word_char(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) != 0 || c == '_' || u >= 0x80;
}

namespace {

bool bounded_at(std::string_view s, std::size_t pos, std::size_t len) noexcept {
    const bool left_ok = pos == 0 || !is_word_char(s[pos - 1]);
    const bool right_ok = pos + len >= s.size() || !is_word_char(s[pos + len]);
    return left_ok && right_ok;
}

}  // namespace

std::string replace_whole_word(std::string_view s, std::string_view word, std::string_view replacement) {
    if (word.empty()) {
        return std::string(s);
    }
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const std::size_t hit = s.find(word, i);
        if (hit == std::string_view::npos) {
            break;
        }
        out.append(s.substr(i, hit - i));
        if (bounded_at(s, hit, word.size())) {
            out.append(replacement);
        } else {
            out.append(word);
        }
        i = hit + word.size();
    }
    if (i < s.size()) {
        out.append(s.substr(i));
    }
    return out;
}

bool contains_whole_word(std::string_view s, std::string_view word) noexcept {
    if (word.empty()) {
        return false;
    }
    for (std::size_t hit = s.find(word); hit != std::string_view::npos; hit = s.find(word, hit + 1)) {
        if (bounded_at(s, hit, word.size())) {
            return true;
        }
    }
    return false;
}

}  // namespace context_drift::text
