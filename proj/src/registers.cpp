#include "wf/registers.hpp"

#include <algorithm>
#include <set>

namespace wf {

std::size_t Register::label_index(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return i;
    }
    throw LayoutError("register '" + name + "' has no label '" + label + "'");
}

bool Register::has_label(const std::string& label) const {
    return std::find(labels.begin(), labels.end(), label) != labels.end();
}

SpaceLayout::SpaceLayout(std::vector<Register> regs) : regs_(std::move(regs)) {
    std::set<std::string> names;
    for (const auto& r : regs_) {
        if (r.dim() == 0) throw LayoutError("register '" + r.name + "' has no labels");
        std::set<std::string> ls(r.labels.begin(), r.labels.end());
        if (ls.size() != r.labels.size())
            throw LayoutError("register '" + r.name + "' has duplicate labels");
        if (!names.insert(r.name).second)
            throw LayoutError("duplicate register name '" + r.name + "'");
    }
    strides_.assign(regs_.size(), 1);
    dim_ = 1;
    for (std::size_t i = regs_.size(); i-- > 0;) {
        strides_[i] = dim_;
        dim_ *= regs_[i].dim();
    }
}

bool SpaceLayout::has_register(const std::string& name) const {
    for (const auto& r : regs_)
        if (r.name == name) return true;
    return false;
}

std::size_t SpaceLayout::register_index(const std::string& name) const {
    for (std::size_t i = 0; i < regs_.size(); ++i)
        if (regs_[i].name == name) return i;
    throw LayoutError("unknown register '" + name + "'");
}

const Register& SpaceLayout::reg(const std::string& name) const {
    return regs_[register_index(name)];
}

std::size_t SpaceLayout::encode(const std::vector<std::size_t>& digits) const {
    if (digits.size() != regs_.size()) throw LayoutError("encode: wrong digit count");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < regs_.size(); ++i) {
        if (digits[i] >= regs_[i].dim()) throw LayoutError("encode: digit out of range");
        idx += digits[i] * strides_[i];
    }
    return idx;
}

std::vector<std::size_t> SpaceLayout::decode(std::size_t index) const {
    if (index >= dim_) throw LayoutError("decode: index out of range");
    std::vector<std::size_t> digits(regs_.size());
    for (std::size_t i = 0; i < regs_.size(); ++i) {
        digits[i] = index / strides_[i];
        index %= strides_[i];
    }
    return digits;
}

SpaceLayout SpaceLayout::extended(const Register& r) const {
    if (has_register(r.name))
        throw LayoutError("duplicate register name '" + r.name + "'");
    std::vector<Register> regs = regs_;
    regs.push_back(r);
    return SpaceLayout(std::move(regs));
}

bool SpaceLayout::same_as(const SpaceLayout& other) const {
    if (regs_.size() != other.regs_.size()) return false;
    for (std::size_t i = 0; i < regs_.size(); ++i) {
        if (regs_[i].name != other.regs_[i].name) return false;
        if (regs_[i].labels != other.regs_[i].labels) return false;
    }
    return true;
}

}  // namespace wf
