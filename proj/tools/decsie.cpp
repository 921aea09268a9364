// command-line front end; subcommands are filled in as the library grows
#include <cstdio>

int main()
{
    std::puts("decsie: no subcommands wired up yet");
    return 2;
}
