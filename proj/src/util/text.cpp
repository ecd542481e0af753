#include "pgate/util/text.hpp"

#include <array>
#include <cmath>
#include <charconv>
#include <stdexcept>

namespace pgate::util {

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const double mag = std::abs(value);
    const bool fixed = mag == 0.0 || (mag >= 1e-5 && mag < 1e15);
    const auto [end, ec] = fixed ? std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed)
                                 : std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buf.data(), end);
}

double parse_double(std::string_view token) {
    token = trim(token);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
        throw std::invalid_argument("not a number: '" + std::string(token) + "'");
    }
    return value;
}

long long parse_int(std::string_view token) {
    token = trim(token);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
        throw std::invalid_argument("not an integer: '" + std::string(token) + "'");
    }
    return value;
}

std::string_view trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view text, char delim) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(delim, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
        if (i >= text.size()) break;
        std::size_t j = i;
        while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != '\r') ++j;
        parts.push_back(text.substr(i, j - i));
        i = j;
    }
    return parts;
}

} // namespace pgate::util
