// Placeholder main; the CLI surface lands with the cli header.
int main() { return 0; }
