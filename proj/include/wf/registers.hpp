#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wf/common.hpp"

namespace wf {

// A named subsystem with a finite labeled basis, e.g. R with labels {h, t}
// or an observer memory with labels {ok, fail, other}.
struct Register {
    std::string name;
    std::vector<std::string> labels;

    std::size_t dim() const { return labels.size(); }
    std::size_t label_index(const std::string& label) const;
    bool has_label(const std::string& label) const;
};

// Ordered product of registers. Tensor order is the order registers were
// added; the first register varies slowest in the flat amplitude index.
class SpaceLayout {
public:
    SpaceLayout() = default;
    explicit SpaceLayout(std::vector<Register> regs);

    const std::vector<Register>& registers() const { return regs_; }
    std::size_t size() const { return regs_.size(); }
    std::size_t dim() const { return dim_; }

    bool has_register(const std::string& name) const;
    std::size_t register_index(const std::string& name) const;
    const Register& reg(const std::string& name) const;
    const Register& reg(std::size_t i) const { return regs_[i]; }

    std::size_t encode(const std::vector<std::size_t>& digits) const;
    std::vector<std::size_t> decode(std::size_t index) const;

    // stride of register i in the flat index
    std::size_t stride(std::size_t i) const { return strides_[i]; }

    SpaceLayout extended(const Register& r) const;  // append; throws on duplicate name
    bool same_as(const SpaceLayout& other) const;   // equal names, dims and labels

private:
    std::vector<Register> regs_;
    std::vector<std::size_t> strides_;
    std::size_t dim_ = 1;
};

}  // namespace wf
