#ifndef EHC_DETAIL_OVERLOADED_HPP
#define EHC_DETAIL_OVERLOADED_HPP

namespace ehc::detail {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace ehc::detail

#endif  // EHC_DETAIL_OVERLOADED_HPP
