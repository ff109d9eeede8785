#include "kl/svg.hpp"

#include <sstream>

#include "kl/numfmt.hpp"

namespace kl::svg {

Canvas::Canvas(double half_extent, int pixels) : half_(half_extent), px_(pixels) {}

void Canvas::polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width,
                      bool closed) {
    if (pts.size() < 2) return;
    std::ostringstream ss;
    ss << "<" << (closed ? "polygon" : "polyline") << " fill=\"none\" stroke=\"" << stroke
       << "\" stroke-width=\"" << fmt(width) << "\" points=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
        if (i) ss << " ";
        ss << fmt(pts[i].x) << "," << fmt(-pts[i].y);
    }
    ss << "\"/>\n";
    body_ += ss.str();
}

void Canvas::circle(Vec2 c, double r, const std::string& stroke, double width) {
    body_ += "<circle fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt(width) +
             "\" cx=\"" + fmt(c.x) + "\" cy=\"" + fmt(-c.y) + "\" r=\"" + fmt(r) + "\"/>\n";
}

void Canvas::dot(Vec2 c, double r, const std::string& fill) {
    body_ += "<circle fill=\"" + fill + "\" cx=\"" + fmt(c.x) + "\" cy=\"" + fmt(-c.y) +
             "\" r=\"" + fmt(r) + "\"/>\n";
}

std::string Canvas::str() const {
    std::ostringstream ss;
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px_ << "\" height=\"" << px_
       << "\" viewBox=\"" << fmt(-half_) << " " << fmt(-half_) << " " << fmt(2 * half_) << " "
       << fmt(2 * half_) << "\">\n"
       << "<rect x=\"" << fmt(-half_) << "\" y=\"" << fmt(-half_) << "\" width=\""
       << fmt(2 * half_) << "\" height=\"" << fmt(2 * half_) << "\" fill=\"white\"/>\n"
       << body_ << "</svg>\n";
    return ss.str();
}

} // namespace kl::svg
