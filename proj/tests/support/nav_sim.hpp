// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <regex>
#include <stdexcept>
#include <string>

namespace prolite::testing {

/// Second Navigate simulator: walks statement sentences with a direction vector.
struct NavWalk {
    std::int64_t x = 0;
    std::int64_t y = 0;
    std::int64_t fx = 0;  // facing vector, starts north
    std::int64_t fy = 1;

    void sentence(const std::string& s) {
        static const std::regex take(R"(Take (\d+) steps?(?: (forward|backward|left|right))?)");
        std::smatch m;
        if (s == "Turn left") {
            rotate_left();
        } else if (s == "Turn right") {
            rotate_left(), rotate_left(), rotate_left();
        } else if (s == "Turn around") {
            fx = -fx, fy = -fy;
        } else if (s == "Always face forward") {
        } else if (std::regex_match(s, m, take)) {
            const std::int64_t n = std::stoll(m[1]);
            const std::string dir = m[2];
            std::int64_t dx = fx, dy = fy;
            if (dir == "backward") dx = -fx, dy = -fy;
            if (dir == "left") dx = -fy, dy = fx;
            if (dir == "right") dx = fy, dy = -fx;
            x += n * dx;
            y += n * dy;
        } else {
            throw std::invalid_argument("unrecognised sentence: " + s);
        }
    }
    void rotate_left() {
        const std::int64_t t = fx;
        fx = -fy;
        fy = t;
    }
    /// Instructions sit between the opening sentence and the question.
    void statement(const std::string& text) {
        const std::string open = "facing north. ";
        const auto b = text.find(open);
        const auto e = text.find(" How far");
        if (b == std::string::npos || e == std::string::npos) throw std::invalid_argument("unexpected statement");
        const std::string body = text.substr(b + open.size(), e - b - open.size());
        std::size_t start = 0;
        while (start < body.size()) {
            auto dot = body.find('.', start);
            if (dot == std::string::npos) dot = body.size();
            std::string s = body.substr(start, dot - start);
            while (!s.empty() && s.front() == ' ') s.erase(s.begin());
            if (!s.empty()) sentence(s);
            start = dot + 1;
        }
    }
    std::int64_t squared() const { return x * x + y * y; }
    double distance() const { return std::sqrt(static_cast<double>(squared())); }
};

}  // namespace prolite::testing
