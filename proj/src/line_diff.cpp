#include "pcc/line_diff.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>

namespace pcc {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

namespace {

struct Point {
    int x = 0;
    int y = 0;
};

// Linear-space Myers diff over interned line ids. `a` is the parent, `b` the
// child; the path is a list of points whose consecutive pairs differ by at
// most one edit plus diagonals.
class MyersDiff {
public:
    MyersDiff(const std::vector<int>& a, const std::vector<int>& b) : a_(a), b_(b) {}

    std::vector<bool> inserted() {
        std::vector<bool> ins(b_.size(), false);
        auto path = find_path(0, 0, static_cast<int>(a_.size()), static_cast<int>(b_.size()));
        if (!path) {
            return ins;
        }
        for (std::size_t i = 0; i + 1 < path->size(); ++i) {
            auto [x1, y1] = (*path)[i];
            auto [x2, y2] = (*path)[i + 1];
            walk_diagonal(x1, y1, x2, y2);
            int dx = x2 - x1;
            int dy = y2 - y1;
            if (dx < dy) {
                ins[static_cast<std::size_t>(y1)] = true;
                ++y1;
            } else if (dx > dy) {
                ++x1;
            }
            walk_diagonal(x1, y1, x2, y2);
        }
        return ins;
    }

private:
    struct Box {
        int left, top, right, bottom;
        int width() const { return right - left; }
        int height() const { return bottom - top; }
        int size() const { return width() + height(); }
        int delta() const { return width() - height(); }
    };

    void walk_diagonal(int& x, int& y, int x2, int y2) const {
        while (x < x2 && y < y2 && a_[static_cast<std::size_t>(x)] == b_[static_cast<std::size_t>(y)]) {
            ++x;
            ++y;
        }
    }

    std::optional<std::vector<Point>> find_path(int left, int top, int right, int bottom) {
        Box box{left, top, right, bottom};
        auto snake = midpair(box);
        if (!snake) return std::nullopt;
        auto [start, finish] = *snake;
        auto head = find_path(box.left, box.top, start.x, start.y);
        auto tail = find_path(finish.x, finish.y, box.right, box.bottom);
        std::vector<Point> path = head ? std::move(*head) : std::vector<Point>{start};
        if (tail) {
            path.insert(path.end(), tail->begin(), tail->end());
        } else {
            path.push_back(finish);
        }
        return path;
    }

    std::optional<std::pair<Point, Point>> midpair(const Box& box) {
        if (box.size() == 0) return std::nullopt;
        int max = (box.size() + 1) / 2;
        int offset = max + 1;
        std::vector<int> vf(static_cast<std::size_t>(2 * max + 3), 0);
        std::vector<int> vb(static_cast<std::size_t>(2 * max + 3), 0);
        auto at = [offset](std::vector<int>& v, int k) -> int& { return v[static_cast<std::size_t>(k + offset)]; };
        at(vf, 1) = box.left;
        at(vb, 1) = box.bottom;

        for (int d = 0; d <= max; ++d) {
            for (int k = d; k >= -d; k -= 2) {
                int c = k - box.delta();
                int px;
                int x;
                if (k == -d || (k != d && at(vf, k - 1) < at(vf, k + 1))) {
                    px = x = at(vf, k + 1);
                } else {
                    px = at(vf, k - 1);
                    x = px + 1;
                }
                int y = box.top + (x - box.left) - k;
                int py = (d == 0 || x != px) ? y : y - 1;
                while (x < box.right && y < box.bottom &&
                       a_[static_cast<std::size_t>(x)] == b_[static_cast<std::size_t>(y)]) {
                    ++x;
                    ++y;
                }
                at(vf, k) = x;
                if ((box.delta() & 1) != 0 && c >= -(d - 1) && c <= d - 1 && y >= at(vb, c)) {
                    return std::pair{Point{px, py}, Point{x, y}};
                }
            }
            for (int c = d; c >= -d; c -= 2) {
                int k = c + box.delta();
                int py;
                int y;
                if (c == -d || (c != d && at(vb, c - 1) > at(vb, c + 1))) {
                    py = y = at(vb, c + 1);
                } else {
                    py = at(vb, c - 1);
                    y = py - 1;
                }
                int x = box.left + (y - box.top) + k;
                int px = (d == 0 || y != py) ? x : x + 1;
                while (x > box.left && y > box.top &&
                       a_[static_cast<std::size_t>(x - 1)] == b_[static_cast<std::size_t>(y - 1)]) {
                    --x;
                    --y;
                }
                at(vb, c) = y;
                if ((box.delta() & 1) == 0 && k >= -d && k <= d && x <= at(vf, k)) {
                    return std::pair{Point{x, y}, Point{px, py}};
                }
            }
        }
        return std::nullopt;
    }

    const std::vector<int>& a_;
    const std::vector<int>& b_;
};

}  // namespace

std::vector<AddedLine> added_lines(std::string_view parent_text, std::string_view child_text,
                                   std::string_view file) {
    auto parent = split_lines(parent_text);
    auto child = split_lines(child_text);

    std::unordered_map<std::string_view, int> ids;
    auto intern = [&ids](const std::vector<std::string_view>& lines) {
        std::vector<int> out;
        out.reserve(lines.size());
        for (auto l : lines) {
            auto [it, fresh] = ids.try_emplace(l, static_cast<int>(ids.size()));
            out.push_back(it->second);
        }
        return out;
    };
    auto a = intern(parent);
    auto b = intern(child);

    // Common prefix and suffix never contain insertions.
    std::size_t pre = 0;
    while (pre < a.size() && pre < b.size() && a[pre] == b[pre]) ++pre;
    std::size_t suf = 0;
    while (suf < a.size() - pre && suf < b.size() - pre && a[a.size() - 1 - suf] == b[b.size() - 1 - suf]) ++suf;

    std::vector<int> mid_a(a.begin() + static_cast<std::ptrdiff_t>(pre), a.end() - static_cast<std::ptrdiff_t>(suf));
    std::vector<int> mid_b(b.begin() + static_cast<std::ptrdiff_t>(pre), b.end() - static_cast<std::ptrdiff_t>(suf));

    std::vector<AddedLine> out;
    std::vector<bool> ins;
    if (mid_a.empty()) {
        ins.assign(mid_b.size(), true);
    } else {
        ins = MyersDiff(mid_a, mid_b).inserted();
    }
    for (std::size_t i = 0; i < ins.size(); ++i) {
        if (!ins[i]) continue;
        std::size_t idx = pre + i;
        out.push_back(AddedLine{std::string(file), idx + 1, std::string(child[idx])});
    }
    return out;
}

}  // namespace pcc
