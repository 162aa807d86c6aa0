// Prints the output size bound of a query, with and without its functional dependencies.

#include <iostream>

#include "wcoj/wcoj.hpp"

int main() {
  const char* text =
      "fd R: 1 -> 2\n"
      "Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(Z,X).\n";
  auto query = wcoj::parse_query(text);
  std::map<std::string, std::uint64_t> sizes{{"R", 1024}, {"S", 1024}, {"T", 1024}};

  auto with_fds = wcoj::cq_bound(query, sizes);
  auto plain = query;
  plain.fds.clear();
  auto without = wcoj::cq_bound(plain, sizes);

  std::cout << wcoj::format_query(query);
  std::cout << "bound without fds: " << without.bound.str(10) << "\n";
  std::cout << "bound with fds:    " << with_fds.bound.str(10) << "\n";
}
