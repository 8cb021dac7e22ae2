from privdisc.apps.privdiscapp import launch_new_instance

if __name__ == '__main__':
    launch_new_instance()
