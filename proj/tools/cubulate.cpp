// Placeholder main; the CLI grows subcommands as the library lands.
int main() { return 0; }
